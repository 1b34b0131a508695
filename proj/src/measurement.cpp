// Copyright 2026 The emosim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "emo/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include "emo/dynamics.hpp"
#include "emo/errors.hpp"

namespace emo {

namespace {

using std::numbers::pi;

Eigen::Index eidx(std::size_t i) {
    return static_cast<Eigen::Index>(i);
}

// Rows of the class -> population aggregation.
enum Bucket : std::size_t { kUpUp = 0, kDownDown = 1, kMixed = 2, kResidual = 3 };

Bucket joint_bucket(IonClass a, IonClass b) {
    const bool ab = a == IonClass::Bright, bb = b == IonClass::Bright;
    const bool ad = a == IonClass::Dark, bd = b == IonClass::Dark;
    if (ab && bb) {
        return kUpUp;
    }
    if (ad && bd) {
        return kDownDown;
    }
    if (ab || bb) {
        return kMixed;
    }
    return kResidual;
}

IonClass class_of_index(std::size_t i) {
    return static_cast<IonClass>(i);
}

// Seed of shot k, decorrelated from neighbours (splitmix64 finalizer).
std::uint64_t shot_seed(std::uint64_t seed, std::uint64_t k) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (k + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::size_t draw_class(const JointClassProbabilities &cdf, double u) {
    for (std::size_t c = 0; c < 9; c++) {
        if (u < cdf[c]) {
            return c;
        }
    }
    // u landed in the rounding gap at the top; take the last populated class.
    for (std::size_t c = 9; c-- > 0;) {
        if (c == 0 || cdf[c] > cdf[c - 1]) {
            return c;
        }
    }
    return 8;
}

JointClassProbabilities cumulative(const JointClassProbabilities &p) {
    double total = 0.0;
    for (double x : p) {
        if (!(x >= -1e-12)) {
            throw ConfigError("class probabilities must be non-negative");
        }
        total += std::max(x, 0.0);
    }
    if (!(std::abs(total - 1.0) < 1e-6)) {
        throw ConfigError("class probabilities must sum to 1");
    }
    JointClassProbabilities cdf{};
    double acc = 0.0;
    for (std::size_t c = 0; c < 9; c++) {
        acc += std::max(p[c], 0.0) / total;
        cdf[c] = acc;
    }
    return cdf;
}

double log_poisson(std::uint32_t k, double mean) {
    return static_cast<double>(k) * std::log(mean) - mean - std::lgamma(static_cast<double>(k) + 1.0);
}

// ---- maximum likelihood on the simplex ------------------------------------

struct MixtureProblem {
    Eigen::MatrixXd lik;   // distinct observations x classes, each row scaled to max 1
    Eigen::VectorXd mult;  // multiplicity of each distinct observation
};

double log_likelihood(const MixtureProblem &p, const Eigen::VectorXd &w) {
    Eigen::VectorXd s = p.lik * w;
    double f = 0.0;
    for (Eigen::Index n = 0; n < s.size(); n++) {
        if (s(n) <= 0.0) {
            return -std::numeric_limits<double>::infinity();
        }
        f += p.mult(n) * std::log(s(n));
    }
    return f;
}

Eigen::VectorXd gradient(const MixtureProblem &p, const Eigen::VectorXd &w) {
    Eigen::VectorXd s = p.lik * w;
    Eigen::VectorXd r = p.mult.cwiseQuotient(s);
    return p.lik.transpose() * r;
}

Eigen::MatrixXd information(const MixtureProblem &p, const Eigen::VectorXd &w) {
    Eigen::VectorXd s = p.lik * w;
    Eigen::VectorXd r = p.mult.cwiseQuotient(s.cwiseProduct(s));
    return p.lik.transpose() * r.asDiagonal() * p.lik;
}

void em_steps(const MixtureProblem &p, Eigen::VectorXd &w, int iterations) {
    const double total = p.mult.sum();
    for (int it = 0; it < iterations; it++) {
        w = w.cwiseProduct(gradient(p, w)) / total;
        w /= w.sum();
    }
}

bool kkt_satisfied(const Eigen::VectorXd &g, const Eigen::VectorXd &w, double total, double tol) {
    for (Eigen::Index k = 0; k < w.size(); k++) {
        const double gk = g(k) / total;
        if (w(k) > 0.0 ? std::abs(gk - 1.0) > tol : gk > 1.0 + tol) {
            return false;
        }
    }
    return true;
}

// Projected Newton with an active set. Returns false if it stalls.
bool newton_active_set(const MixtureProblem &p, Eigen::VectorXd &w) {
    const double total = p.mult.sum();
    const auto k = w.size();
    for (int it = 0; it < 200; it++) {
        Eigen::VectorXd g = gradient(p, w);
        if (kkt_satisfied(g, w, total, 1e-10)) {
            return true;
        }
        // Release the most violating bound component, if any.
        std::vector<Eigen::Index> free;
        Eigen::Index release = -1;
        double worst = 1.0 + 1e-10;
        for (Eigen::Index i = 0; i < k; i++) {
            if (w(i) > 0.0) {
                free.push_back(i);
            } else if (g(i) / total > worst) {
                worst = g(i) / total;
                release = i;
            }
        }
        if (release >= 0) {
            free.push_back(release);
            std::sort(free.begin(), free.end());
        }

        const auto nf = static_cast<Eigen::Index>(free.size());
        Eigen::MatrixXd q_full = information(p, w);
        Eigen::MatrixXd q(nf, nf);
        Eigen::VectorXd gf(nf);
        for (Eigen::Index a = 0; a < nf; a++) {
            gf(a) = g(free[static_cast<std::size_t>(a)]);
            for (Eigen::Index b = 0; b < nf; b++) {
                q(a, b) = q_full(free[static_cast<std::size_t>(a)], free[static_cast<std::size_t>(b)]);
            }
        }
        q.diagonal().array() += 1e-14 * q.trace();
        Eigen::LDLT<Eigen::MatrixXd> ldlt(q);
        if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
            return false;
        }
        Eigen::VectorXd qg = ldlt.solve(gf);
        Eigen::VectorXd q1 = ldlt.solve(Eigen::VectorXd::Ones(nf));
        const double nu = qg.sum() / q1.sum();
        Eigen::VectorXd d_free = qg - nu * q1;

        Eigen::VectorXd d = Eigen::VectorXd::Zero(k);
        for (Eigen::Index a = 0; a < nf; a++) {
            d(free[static_cast<std::size_t>(a)]) = d_free(a);
        }
        if (d.lpNorm<Eigen::Infinity>() < 1e-16) {
            return kkt_satisfied(g, w, total, 1e-8);
        }
        double t_max = 1.0;
        Eigen::Index blocking = -1;
        for (Eigen::Index i = 0; i < k; i++) {
            if (d(i) < 0.0 && -w(i) / d(i) < t_max) {
                t_max = -w(i) / d(i);
                blocking = i;
            }
        }
        if (t_max <= 0.0) {
            return false;
        }
        const double f0 = log_likelihood(p, w);
        double t = t_max;
        Eigen::VectorXd trial;
        for (;;) {
            trial = (w + t * d).cwiseMax(0.0);
            if (t == t_max && blocking >= 0) {
                trial(blocking) = 0.0;
            }
            trial /= trial.sum();
            if (log_likelihood(p, trial) >= f0 - 1e-13 * std::abs(f0)) {
                break;
            }
            t *= 0.5;
            if (t < 1e-14) {
                return false;
            }
        }
        w = trial;
    }
    return kkt_satisfied(gradient(p, w), w, total, 1e-8);
}

// Covariance of the simplex-constrained MLE: Z (Z^T I Z)^-1 Z^T on the free set.
Eigen::MatrixXd simplex_covariance(const MixtureProblem &p, const Eigen::VectorXd &w) {
    const auto k = w.size();
    std::vector<Eigen::Index> free;
    for (Eigen::Index i = 0; i < k; i++) {
        if (w(i) > 0.0) {
            free.push_back(i);
        }
    }
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(k, k);
    const auto nf = static_cast<Eigen::Index>(free.size());
    if (nf < 2) {
        return cov;
    }
    Eigen::MatrixXd info = information(p, w);
    Eigen::MatrixXd z = Eigen::MatrixXd::Zero(k, nf - 1);
    for (Eigen::Index a = 0; a + 1 < nf; a++) {
        z(free[static_cast<std::size_t>(a)], a) = 1.0;
        z(free.back(), a) = -1.0;
    }
    Eigen::MatrixXd reduced = z.transpose() * info * z;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(reduced);
    Eigen::MatrixXd inv;
    if (ldlt.info() == Eigen::Success && ldlt.isPositive() && ldlt.rcond() > 1e-14) {
        inv = ldlt.solve(Eigen::MatrixXd::Identity(nf - 1, nf - 1));
    } else {
        inv = reduced.completeOrthogonalDecomposition().pseudoInverse();
    }
    return z * inv * z.transpose();
}

PopulationEstimate solve_mixture(const MixtureProblem &p, const std::vector<Bucket> &bucket_of_class) {
    const auto k = p.lik.cols();
    Eigen::VectorXd w = Eigen::VectorXd::Constant(k, 1.0 / static_cast<double>(k));
    em_steps(p, w, 200);
    for (Eigen::Index i = 0; i < k; i++) {
        if (w(i) < 1e-15) {
            w(i) = 0.0;
        }
    }
    w /= w.sum();
    if (!newton_active_set(p, w)) {
        // Slow but monotone.
        w = Eigen::VectorXd::Constant(k, 1.0 / static_cast<double>(k));
        const double total = p.mult.sum();
        for (int round = 0; round < 200 && !kkt_satisfied(gradient(p, w), w, total, 1e-8); round++) {
            em_steps(p, w, 500);
            for (Eigen::Index i = 0; i < k; i++) {
                if (w(i) < 1e-300) {
                    w(i) = 0.0;
                }
            }
        }
    }

    Eigen::MatrixXd cov = simplex_covariance(p, w);
    Eigen::MatrixXd agg = Eigen::MatrixXd::Zero(3, k);
    PopulationEstimate est;
    for (Eigen::Index i = 0; i < k; i++) {
        const Bucket b = bucket_of_class[static_cast<std::size_t>(i)];
        switch (b) {
            case kUpUp: est.p_up_up += w(i); break;
            case kDownDown: est.p_down_down += w(i); break;
            case kMixed: est.p_mixed += w(i); break;
            case kResidual: est.residual += w(i); break;
        }
        if (b != kResidual) {
            agg(static_cast<Eigen::Index>(b), i) = 1.0;
        }
    }
    est.covariance = agg * cov * agg.transpose();
    est.shots = static_cast<std::size_t>(std::llround(p.mult.sum()));
    return est;
}

void check_distinct(const std::vector<double> &means) {
    for (std::size_t a = 0; a < means.size(); a++) {
        for (std::size_t b = a + 1; b < means.size(); b++) {
            if (std::abs(means[a] - means[b]) <= 1e-12 * std::max(means[a], means[b])) {
                throw ConfigError("detection classes are indistinguishable (equal Poisson means)");
            }
        }
    }
}

}  // namespace

void DetectionModel::validate() const {
    if (!(bright_mean > 0.0) || !(dark_mean > 0.0) || !(intermediate_mean > 0.0)) {
        throw ConfigError("detection means must be positive");
    }
    if (!(window_us > 0.0)) {
        throw ConfigError("detection window must be positive");
    }
}

IonClass ion_class(std::size_t lvl) {
    if (lvl == level::kUp) {
        return IonClass::Bright;
    }
    if (lvl == level::kF2mMinus1) {
        return IonClass::Intermediate;
    }
    return IonClass::Dark;
}

double class_mean(const DetectionModel &detection, IonClass c) {
    switch (c) {
        case IonClass::Bright: return detection.bright_mean;
        case IonClass::Intermediate: return detection.intermediate_mean;
        case IonClass::Dark: return detection.dark_mean;
    }
    return detection.dark_mean;
}

JointClassProbabilities joint_class_probabilities(const QuantumState &state, const std::string &ion_a,
                                                  const std::string &ion_b) {
    for (const auto &ion : {ion_a, ion_b}) {
        if (state.reg().at(ion).kind != SubsystemKind::IonQudit) {
            throw ConfigError("'" + ion + "' is not an ion qudit");
        }
    }
    const QuantumState reduced = partial_trace(state, {ion_a, ion_b});
    const auto &reg = reduced.reg();
    JointClassProbabilities p{};
    const Eigen::VectorXd pops = reduced.populations();
    for (std::size_t i = 0; i < reg.total_dimension(); i++) {
        const auto dig = reg.digits(i);
        const std::size_t la = dig[reg.index_of(ion_a)];
        const std::size_t lb = dig[reg.index_of(ion_b)];
        const auto ca = static_cast<std::size_t>(ion_class(la));
        const auto cb = static_cast<std::size_t>(ion_class(lb));
        p[3 * ca + cb] += std::max(pops(eidx(i)), 0.0);
    }
    double total = 0.0;
    for (double x : p) {
        total += x;
    }
    for (double &x : p) {
        x /= total;
    }
    return p;
}

PopulationEstimate populations_from_classes(const JointClassProbabilities &p) {
    PopulationEstimate est;
    for (std::size_t c = 0; c < 9; c++) {
        switch (joint_bucket(class_of_index(c / 3), class_of_index(c % 3))) {
            case kUpUp: est.p_up_up += p[c]; break;
            case kDownDown: est.p_down_down += p[c]; break;
            case kMixed: est.p_mixed += p[c]; break;
            case kResidual: est.residual += p[c]; break;
        }
    }
    return est;
}

std::vector<std::uint32_t> simulate_counts(const JointClassProbabilities &p, const DetectionModel &detection,
                                           std::size_t shots, std::uint64_t seed) {
    detection.validate();
    const auto cdf = cumulative(p);
    std::vector<std::uint32_t> out(shots);
    const auto n = static_cast<long long>(shots);
#pragma omp parallel for schedule(static)
    for (long long k = 0; k < n; k++) {
        std::mt19937_64 rng(shot_seed(seed, static_cast<std::uint64_t>(k)));
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        const std::size_t c = draw_class(cdf, uni(rng));
        const double mean = class_mean(detection, class_of_index(c / 3)) + class_mean(detection, class_of_index(c % 3));
        std::poisson_distribution<std::uint32_t> pois(mean);
        out[static_cast<std::size_t>(k)] = pois(rng);
    }
    return out;
}

std::vector<std::uint32_t> simulate_counts(const QuantumState &state, const DetectionModel &detection,
                                           std::size_t shots, std::uint64_t seed) {
    return simulate_counts(joint_class_probabilities(state), detection, shots, seed);
}

std::vector<std::array<std::uint32_t, 2>> simulate_counts_per_ion(const JointClassProbabilities &p,
                                                                   const DetectionModel &detection,
                                                                   std::size_t shots, std::uint64_t seed) {
    detection.validate();
    const auto cdf = cumulative(p);
    std::vector<std::array<std::uint32_t, 2>> out(shots);
    const auto n = static_cast<long long>(shots);
#pragma omp parallel for schedule(static)
    for (long long k = 0; k < n; k++) {
        std::mt19937_64 rng(shot_seed(seed, static_cast<std::uint64_t>(k)));
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        const std::size_t c = draw_class(cdf, uni(rng));
        std::poisson_distribution<std::uint32_t> pa(class_mean(detection, class_of_index(c / 3)));
        std::poisson_distribution<std::uint32_t> pb(class_mean(detection, class_of_index(c % 3)));
        const std::uint32_t a = pa(rng);
        out[static_cast<std::size_t>(k)] = {a, pb(rng)};
    }
    return out;
}

PopulationEstimate ml_populations(const std::vector<std::uint32_t> &counts, const DetectionModel &detection) {
    detection.validate();
    if (counts.empty()) {
        throw ConfigError("no counts to estimate populations from");
    }
    const double b = detection.bright_mean, d = detection.dark_mean, i = detection.intermediate_mean;
    const std::vector<double> means{2.0 * b, b + d, 2.0 * d, i + d};
    const std::vector<Bucket> buckets{kUpUp, kMixed, kDownDown, kResidual};
    check_distinct(means);

    std::map<std::uint32_t, double> hist;
    for (auto c : counts) {
        hist[c] += 1.0;
    }
    MixtureProblem prob;
    prob.lik.resize(eidx(hist.size()), eidx(means.size()));
    prob.mult.resize(eidx(hist.size()));
    Eigen::Index row = 0;
    for (const auto &[c, m] : hist) {
        Eigen::VectorXd ll(eidx(means.size()));
        for (std::size_t k = 0; k < means.size(); k++) {
            ll(eidx(k)) = log_poisson(c, means[k]);
        }
        prob.lik.row(row) = (ll.array() - ll.maxCoeff()).exp().transpose();
        prob.mult(row) = m;
        row++;
    }
    return solve_mixture(prob, buckets);
}

PopulationEstimate ml_populations(const std::vector<std::array<std::uint32_t, 2>> &counts,
                                  const DetectionModel &detection) {
    detection.validate();
    if (counts.empty()) {
        throw ConfigError("no counts to estimate populations from");
    }
    check_distinct({detection.bright_mean, detection.intermediate_mean, detection.dark_mean});
    std::vector<Bucket> buckets;
    for (std::size_t c = 0; c < 9; c++) {
        buckets.push_back(joint_bucket(class_of_index(c / 3), class_of_index(c % 3)));
    }
    std::map<std::array<std::uint32_t, 2>, double> hist;
    for (const auto &c : counts) {
        hist[c] += 1.0;
    }
    MixtureProblem prob;
    prob.lik.resize(eidx(hist.size()), 9);
    prob.mult.resize(eidx(hist.size()));
    Eigen::Index row = 0;
    for (const auto &[c, m] : hist) {
        Eigen::VectorXd ll(9);
        for (std::size_t k = 0; k < 9; k++) {
            ll(eidx(k)) = log_poisson(c[0], class_mean(detection, class_of_index(k / 3))) +
                          log_poisson(c[1], class_mean(detection, class_of_index(k % 3)));
        }
        prob.lik.row(row) = (ll.array() - ll.maxCoeff()).exp().transpose();
        prob.mult(row) = m;
        row++;
    }
    return solve_mixture(prob, buckets);
}

double parity(const PopulationEstimate &p) {
    return p.p_down_down + p.p_up_up - p.p_mixed;
}

double parity_std_error(const PopulationEstimate &p) {
    if (p.shots == 0) {
        return 0.0;
    }
    const Eigen::Vector3d g(1.0, 1.0, -1.0);
    const double var = g.dot(p.covariance * g);
    return std::max(std::sqrt(std::max(var, 0.0)), 1.0 / static_cast<double>(p.shots));
}

ParityPoint parity_point(double phi_p, const PopulationEstimate &p) {
    return ParityPoint{phi_p, parity(p), parity_std_error(p), p.shots};
}

double FitResult::evaluate(double phi) const {
    return C2 * std::cos(2.0 * phi + phi2) + C1 * std::cos(phi + phi1) + C0;
}

std::array<double, 5> FitResult::uncertainties() const {
    std::array<double, 5> u{};
    for (int i = 0; i < 5; i++) {
        u[static_cast<std::size_t>(i)] = std::sqrt(std::max(cov(i, i), 0.0));
    }
    return u;
}

FitResult fit_parity(const std::vector<ParityPoint> &points) {
    std::vector<double> phases;
    for (const auto &pt : points) {
        if (!std::isfinite(pt.phi_p) || !std::isfinite(pt.parity)) {
            throw FitError("parity data contains non-finite values");
        }
        double r = std::fmod(pt.phi_p, 2.0 * pi);
        phases.push_back(r < 0 ? r + 2.0 * pi : r);
    }
    std::sort(phases.begin(), phases.end());
    std::size_t distinct = 0;
    for (std::size_t i = 0; i < phases.size(); i++) {
        if (i == 0 || phases[i] - phases[i - 1] > 1e-9) {
            distinct++;
        }
    }
    if (distinct > 1 && 2.0 * pi - phases.back() + phases.front() <= 1e-9) {
        distinct--;
    }
    if (distinct < 5) {
        throw FitError("parity fit needs at least 5 distinct analysis phases, got " + std::to_string(distinct));
    }

    const auto n = eidx(points.size());
    bool weighted = true;
    for (const auto &pt : points) {
        if (!(pt.std_error > 0.0)) {
            weighted = false;
        }
    }
    Eigen::MatrixXd x(n, 5);
    Eigen::VectorXd y(n), scale(n);
    for (Eigen::Index i = 0; i < n; i++) {
        const auto &pt = points[static_cast<std::size_t>(i)];
        x.row(i) << std::cos(2.0 * pt.phi_p), std::sin(2.0 * pt.phi_p), std::cos(pt.phi_p), std::sin(pt.phi_p), 1.0;
        y(i) = pt.parity;
        scale(i) = weighted ? 1.0 / pt.std_error : 1.0;
    }
    Eigen::MatrixXd xw = scale.asDiagonal() * x;
    Eigen::VectorXd yw = scale.cwiseProduct(y);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xw);
    qr.setThreshold(1e-10);
    if (qr.rank() < 5) {
        throw FitError("parity fit design matrix is rank deficient");
    }
    Eigen::VectorXd beta = qr.solve(yw);
    Eigen::VectorXd resid = y - x * beta;

    Eigen::MatrixXd cov_beta = (xw.transpose() * xw).ldlt().solve(Eigen::MatrixXd::Identity(5, 5));
    if (!weighted) {
        const double s2 = n > 5 ? resid.squaredNorm() / static_cast<double>(n - 5) : 0.0;
        cov_beta *= s2;
    }

    FitResult fit;
    const double a2 = beta(0), b2 = beta(1), a1 = beta(2), b1 = beta(3);
    fit.C2 = std::hypot(a2, b2);
    fit.phi2 = std::atan2(-b2, a2);
    fit.C1 = std::hypot(a1, b1);
    fit.phi1 = std::atan2(-b1, a1);
    fit.C0 = beta(4);
    fit.residual_rms = std::sqrt(resid.squaredNorm() / static_cast<double>(n));

    // Jacobian of (C2, C1, C0, phi2, phi1) with respect to (a2, b2, a1, b1, c0).
    Eigen::Matrix<double, 5, 5> jac = Eigen::Matrix<double, 5, 5>::Zero();
    if (fit.C2 > 0.0) {
        jac(0, 0) = a2 / fit.C2;
        jac(0, 1) = b2 / fit.C2;
        jac(3, 0) = b2 / (fit.C2 * fit.C2);
        jac(3, 1) = -a2 / (fit.C2 * fit.C2);
    }
    if (fit.C1 > 0.0) {
        jac(1, 2) = a1 / fit.C1;
        jac(1, 3) = b1 / fit.C1;
        jac(4, 2) = b1 / (fit.C1 * fit.C1);
        jac(4, 3) = -a1 / (fit.C1 * fit.C1);
    }
    jac(2, 4) = 1.0;
    fit.cov = jac * cov_beta * jac.transpose();
    return fit;
}

WitnessResult entanglement_witness(const FitResult &fit) {
    return WitnessResult{fit.C2 > 0.5, fit.C2 - 0.5};
}

}  // namespace emo
