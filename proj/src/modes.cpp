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

#include "emo/modes.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <boost/math/tools/roots.hpp>

#include "emo/errors.hpp"

namespace emo {

namespace {

using std::numbers::pi;

constexpr double kElementaryCharge = 1.602176634e-19;
constexpr double kEpsilon0 = 8.8541878128e-12;
constexpr double kAtomicMass = 1.66053906660e-27;
constexpr double kHbar = 1.054571817e-34;

Eigen::Index eidx(std::size_t i) {
    return static_cast<Eigen::Index>(i);
}

/// Length unit l0 in metres for the config's common spring constant.
double length_unit_m(const IonChainConfig &c) {
    const double w = 2.0 * pi * c.axial_frequency_mhz * 1e6;
    const double k = c.reference_mass_amu * kAtomicMass * w * w;
    return std::cbrt(kElementaryCharge * kElementaryCharge / (4.0 * pi * kEpsilon0 * k));
}

struct Scaled {
    std::vector<double> centers;  // per ion, scaled
    std::vector<double> spring;   // per ion, curvature scale
};

Scaled scaled_problem(const IonChainConfig &c) {
    const double l0 = length_unit_m(c);
    Scaled s;
    for (std::size_t i = 0; i < c.ions.size(); i++) {
        const auto w = c.well_of(i);
        s.centers.push_back(c.well_centers_mm[w] * 1e-3 / l0);
        s.spring.push_back(c.curvature_scale(w));
    }
    return s;
}

void gradient_and_hessian(const Scaled &p, const Eigen::VectorXd &u, Eigen::VectorXd &g, Eigen::MatrixXd &h) {
    const auto n = u.size();
    g.setZero(n);
    h.setZero(n, n);
    for (Eigen::Index i = 0; i < n; i++) {
        g(i) += p.spring[static_cast<std::size_t>(i)] * (u(i) - p.centers[static_cast<std::size_t>(i)]);
        h(i, i) += p.spring[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < n; j++) {
            if (i == j) {
                continue;
            }
            const double d = u(i) - u(j);
            const double ad = std::abs(d);
            g(i) -= (d > 0 ? 1.0 : -1.0) / (ad * ad);
            const double c = 2.0 / (ad * ad * ad);
            h(i, i) += c;
            h(i, j) -= c;
        }
    }
}

bool ordered(const Eigen::VectorXd &u) {
    for (Eigen::Index i = 1; i < u.size(); i++) {
        if (!(u(i) > u(i - 1))) {
            return false;
        }
    }
    return true;
}

Eigen::VectorXd solve_equilibrium(const IonChainConfig &c, const Scaled &p) {
    const auto n = eidx(c.ions.size());
    // Start each well's ions at unit spacing around its center.
    Eigen::VectorXd u(n);
    std::vector<std::size_t> count(c.well_count(), 0), seen(c.well_count(), 0);
    for (std::size_t i = 0; i < c.ions.size(); i++) {
        count[c.well_of(i)]++;
    }
    for (std::size_t i = 0; i < c.ions.size(); i++) {
        const auto w = c.well_of(i);
        const double offset = static_cast<double>(seen[w]++) - 0.5 * static_cast<double>(count[w] - 1);
        u(eidx(i)) = p.centers[i] + 1.2 * offset;
    }
    if (!ordered(u)) {
        throw ConfigError("ions must be listed left to right with non-overlapping wells");
    }

    Eigen::VectorXd g;
    Eigen::MatrixXd h;
    for (int iter = 0; iter < 200; iter++) {
        gradient_and_hessian(p, u, g, h);
        if (g.norm() < 1e-12) {
            return u;
        }
        Eigen::VectorXd step = h.ldlt().solve(g);
        double t = 1.0;
        Eigen::VectorXd trial = u - step;
        while (!ordered(trial) && t > 1e-6) {
            t *= 0.5;
            trial = u - t * step;
        }
        u = trial;
    }
    gradient_and_hessian(p, u, g, h);
    if (g.norm() < 1e-12) {
        return u;
    }
    throw NumericalError("equilibrium search did not converge (gradient norm " + std::to_string(g.norm()) + ")");
}

}  // namespace

double species::mass_amu(const std::string &name) {
    if (name == "Be" || name == "Be9" || name == "9Be") {
        return kBe9MassAmu;
    }
    if (name == "Mg" || name == "Mg24" || name == "24Mg") {
        return kMg24MassAmu;
    }
    throw ConfigError("unknown ion species '" + name + "'");
}

IonChainConfig IonChainConfig::single_well(const std::vector<std::string> &names, double axial_frequency_mhz) {
    IonChainConfig c;
    for (const auto &n : names) {
        c.ions.push_back(Ion{n, species::mass_amu(n)});
    }
    c.axial_frequency_mhz = axial_frequency_mhz;
    return c;
}

IonChainConfig IonChainConfig::double_well(double spacing_mm, double axial_frequency_mhz, double well_b_scale) {
    IonChainConfig c = single_well({"Be", "Mg", "Mg", "Be"}, axial_frequency_mhz);
    c.well_centers_mm = {-spacing_mm / 2.0, spacing_mm / 2.0};
    c.well_of_ion = {0, 0, 1, 1};
    c.well_curvature_scale = {1.0, well_b_scale};
    return c;
}

std::size_t IonChainConfig::well_of(std::size_t ion) const {
    return well_of_ion.empty() ? 0 : well_of_ion[ion];
}

double IonChainConfig::curvature_scale(std::size_t well) const {
    return well_curvature_scale.empty() ? 1.0 : well_curvature_scale[well];
}

void IonChainConfig::validate() const {
    if (ions.empty()) {
        throw ConfigError("ion chain needs at least one ion");
    }
    for (const auto &ion : ions) {
        if (!(ion.mass_amu > 0.0)) {
            throw ConfigError("ion masses must be positive");
        }
    }
    if (!(axial_frequency_mhz > 0.0) || !(reference_mass_amu > 0.0)) {
        throw ConfigError("axial frequency and reference mass must be positive");
    }
    if (well_centers_mm.empty()) {
        throw ConfigError("at least one well center is required");
    }
    if (!well_of_ion.empty() && well_of_ion.size() != ions.size()) {
        throw ConfigError("well_of_ion must list one well per ion");
    }
    for (auto w : well_of_ion) {
        if (w >= well_centers_mm.size()) {
            throw ConfigError("well index out of range");
        }
    }
    if (!well_curvature_scale.empty() && well_curvature_scale.size() != well_centers_mm.size()) {
        throw ConfigError("well_curvature_scale must list one value per well");
    }
    for (double s : well_curvature_scale) {
        if (!(s > 0.0)) {
            throw ConfigError("well curvature scales must be positive");
        }
    }
    for (std::size_t w = 1; w < well_centers_mm.size(); w++) {
        if (!(well_centers_mm[w] > well_centers_mm[w - 1])) {
            throw ConfigError("well spacing must be positive (centers ascending)");
        }
    }
}

std::vector<double> equilibrium_positions(const IonChainConfig &config) {
    config.validate();
    auto p = scaled_problem(config);
    auto u = solve_equilibrium(config, p);
    const double l0 = length_unit_m(config);
    std::vector<double> out(config.ions.size());
    for (std::size_t i = 0; i < out.size(); i++) {
        out[i] = u(eidx(i)) * l0;
    }
    return out;
}

ModeSolution axial_normal_modes(const IonChainConfig &config) {
    config.validate();
    auto p = scaled_problem(config);
    auto u = solve_equilibrium(config, p);
    Eigen::VectorXd g;
    Eigen::MatrixXd h;
    gradient_and_hessian(p, u, g, h);

    const auto n = eidx(config.ions.size());
    Eigen::VectorXd inv_sqrt_mu(n);
    for (Eigen::Index i = 0; i < n; i++) {
        inv_sqrt_mu(i) = 1.0 / std::sqrt(config.ions[static_cast<std::size_t>(i)].mass_amu / config.reference_mass_amu);
    }
    Eigen::MatrixXd k = inv_sqrt_mu.asDiagonal() * h * inv_sqrt_mu.asDiagonal();
    k = 0.5 * (k + k.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k);
    if (es.info() != Eigen::Success) {
        throw NumericalError("mode eigen-decomposition failed");
    }

    const double f0 = config.axial_frequency_mhz;
    const double l0 = length_unit_m(config);
    ModeSolution sol;
    sol.mass_weighted_hessian = k * (f0 * f0);
    for (Eigen::Index i = 0; i < n; i++) {
        sol.positions_m.push_back(u(i) * l0);
    }
    for (Eigen::Index m = 0; m < n; m++) {
        const double lambda = es.eigenvalues()(m);
        if (!(lambda > 0.0)) {
            throw InstabilityError("linear configuration is unstable: mode " + std::to_string(m) +
                                   " has eigenvalue " + std::to_string(lambda));
        }
        const double f = f0 * std::sqrt(lambda);
        Eigen::VectorXd v = es.eigenvectors().col(m);
        for (Eigen::Index i = 0; i < n; i++) {
            if (std::abs(v(i)) > 1e-12) {
                if (v(i) < 0) {
                    v = -v;
                }
                break;
            }
        }
        const double omega = 2.0 * pi * f * 1e6;
        std::vector<double> vec(static_cast<std::size_t>(n)), size(static_cast<std::size_t>(n));
        for (Eigen::Index i = 0; i < n; i++) {
            const double mass = config.ions[static_cast<std::size_t>(i)].mass_amu * kAtomicMass;
            vec[static_cast<std::size_t>(i)] = v(i);
            size[static_cast<std::size_t>(i)] = v(i) * std::sqrt(kHbar / (2.0 * mass * omega));
        }
        sol.frequencies_mhz.push_back(f);
        sol.mode_vectors.push_back(std::move(vec));
        sol.ground_state_sizes_m.push_back(std::move(size));
    }
    return sol;
}

IonChainConfig calibrate_curvature(const IonChainConfig &config, std::size_t mode_index, double target_mhz) {
    config.validate();
    if (!(target_mhz > 0.0)) {
        throw ConfigError("calibration target frequency must be positive");
    }
    if (mode_index >= config.ions.size()) {
        throw ConfigError("mode index out of range");
    }
    IonChainConfig work = config;
    auto mismatch = [&](double axial) {
        work.axial_frequency_mhz = axial;
        return axial_normal_modes(work).frequencies_mhz[mode_index] / target_mhz - 1.0;
    };

    // Frequencies are exactly proportional to the axial frequency in one well
    // and nearly so for well spacings fixed in metres, so the proportional
    // guess is a tight starting bracket.
    const double current = axial_normal_modes(config).frequencies_mhz[mode_index];
    double guess = config.axial_frequency_mhz * target_mhz / current;
    double lo = guess * 0.9;
    double hi = guess * 1.1;
    double f_lo = mismatch(lo);
    double f_hi = mismatch(hi);
    for (int expand = 0; expand < 20 && f_lo * f_hi > 0.0; expand++) {
        lo *= 0.5;
        hi *= 2.0;
        f_lo = mismatch(lo);
        f_hi = mismatch(hi);
    }
    if (f_lo * f_hi > 0.0) {
        throw NumericalError("no bracketing axial frequency for the calibration target");
    }
    std::uintmax_t max_iter = 200;
    auto tol = boost::math::tools::eps_tolerance<double>(48);
    auto [a, b] = boost::math::tools::toms748_solve(mismatch, lo, hi, f_lo, f_hi, tol, max_iter);
    IonChainConfig out = config;
    const double fa = std::abs(mismatch(a));
    const double fb = std::abs(mismatch(b));
    out.axial_frequency_mhz = fa <= fb ? a : b;
    if (std::min(fa, fb) > 1e-6) {
        throw NumericalError("curvature calibration did not reach 1e-6 relative accuracy");
    }
    return out;
}

ExchangeResult interwell_exchange(const IonChainConfig &config) {
    config.validate();
    if (config.well_count() != 2 || config.ions.size() != 4) {
        throw ConfigError("exchange analysis needs two wells with one ion pair each");
    }
    std::vector<std::vector<std::size_t>> members(2);
    for (std::size_t i = 0; i < 4; i++) {
        members[config.well_of(i)].push_back(i);
    }
    if (members[0].size() != 2 || members[1].size() != 2) {
        throw ConfigError("exchange analysis needs exactly two ions per well");
    }

    ExchangeResult out;
    out.modes = axial_normal_modes(config);
    const auto &x = out.modes.positions_m;
    const double intra = std::max(std::abs(x[members[0][1]] - x[members[0][0]]), std::abs(x[members[1][1]] - x[members[1][0]]));
    const double gap = x[members[1][0]] - x[members[0][1]];
    if (!(gap > 5.0 * intra)) {
        throw ConfigError("wells too close: the two pairs merge into one crystal");
    }

    const auto &f = out.modes.frequencies_mhz;
    out.splitting_hz = (f[3] - f[2]) * 1e6;
    out.exchange_rate_hz = out.splitting_hz;

    // Isolated stretch frequencies of each well.
    std::vector<double> stretch(2);
    for (std::size_t w = 0; w < 2; w++) {
        IonChainConfig single;
        single.axial_frequency_mhz = config.axial_frequency_mhz;
        single.reference_mass_amu = config.reference_mass_amu;
        single.ions = {config.ions[members[w][0]], config.ions[members[w][1]]};
        single.well_curvature_scale = {config.curvature_scale(w)};
        stretch[w] = axial_normal_modes(single).frequencies_mhz[1];
    }
    out.detuning_hz = std::abs(stretch[0] - stretch[1]) * 1e6;
    return out;
}

double exchange_transfer_probability(double exchange_rate_hz, double detuning_hz, double time_s) {
    if (exchange_rate_hz < 0.0 || detuning_hz < 0.0 || time_s < 0.0) {
        throw ConfigError("exchange rates and times must be non-negative");
    }
    const double g2 = exchange_rate_hz * exchange_rate_hz;
    const double eff2 = g2 + 0.25 * detuning_hz * detuning_hz;
    if (eff2 == 0.0) {
        return 0.0;
    }
    const double s = std::sin(pi * std::sqrt(eff2) * time_s);
    return g2 / eff2 * s * s;
}

double exchange_population_bound(double exchange_rate_hz, double detuning_hz, double time_s) {
    if (exchange_rate_hz < 0.0 || detuning_hz < 0.0 || time_s < 0.0) {
        throw ConfigError("exchange rates and times must be non-negative");
    }
    const double g2 = exchange_rate_hz * exchange_rate_hz;
    const double eff2 = g2 + 0.25 * detuning_hz * detuning_hz;
    if (eff2 == 0.0) {
        return 0.0;
    }
    // The oscillation first peaks at t = 1 / (2 sqrt(eff2)) and rises monotonically before that.
    const double first_peak = 0.5 / std::sqrt(eff2);
    if (time_s >= first_peak) {
        return g2 / eff2;
    }
    return exchange_transfer_probability(exchange_rate_hz, detuning_hz, time_s);
}

}  // namespace emo
