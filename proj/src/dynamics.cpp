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

#include "emo/dynamics.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>

#include "emo/errors.hpp"

namespace emo {

namespace {

using std::numbers::pi;
const cd kI(0.0, 1.0);

Eigen::Index eidx(std::size_t i) {
    return static_cast<Eigen::Index>(i);
}

bool is_probability(double p) {
    return p >= 0.0 && p <= 1.0;
}

}  // namespace

void Rotation::validate() const {
    if (!(theta >= 0.0 && theta <= 2.0 * pi + 1e-12)) {
        throw ConfigError("rotation angle must lie in [0, 2pi]");
    }
    if (!(duration_us > 0.0)) {
        throw ConfigError("rotation duration must be positive");
    }
    if (kind == RotationKind::Sideband && mode.empty()) {
        throw ConfigError("sideband rotation requires a mode label");
    }
    if (ions.empty()) {
        throw ConfigError("rotation has no target ion");
    }
}

NoiseModel NoiseModel::ideal() {
    NoiseModel n;
    n.prep_fidelity = 1.0;
    n.intensity_jitter_rms = 0.0;
    n.uniform_field_jitter_rms_hz = 0.0;
    n.scatter_error_per_transfer = 0.0;
    n.cooled_nbar_a = 0.0;
    n.cooled_nbar_b = 0.0;
    n.motional_coherence_time_us = std::numeric_limits<double>::infinity();
    return n;
}

NoiseModel NoiseModel::thermal_only() {
    NoiseModel n = ideal();
    n.cooled_nbar_a = NoiseModel{}.cooled_nbar_a;
    n.cooled_nbar_b = NoiseModel{}.cooled_nbar_b;
    return n;
}

void NoiseModel::validate() const {
    if (!is_probability(prep_fidelity) || !is_probability(scatter_error_per_transfer)) {
        throw ConfigError("noise probabilities must lie in [0, 1]");
    }
    if (!(motional_coherence_time_us > 0.0) || !(motional_tau_scale > 0.0)) {
        throw ConfigError("motional coherence time must be positive");
    }
    if (!(intensity_jitter_rms >= 0.0) || !(uniform_field_jitter_rms_hz >= 0.0)) {
        throw ConfigError("jitter widths must be non-negative");
    }
    if (!(cooled_nbar_a >= 0.0) || !(cooled_nbar_b >= 0.0) || !(separation_nbar >= 0.0)) {
        throw ConfigError("mean occupations must be non-negative");
    }
    if (!std::isfinite(field_gradient_hz)) {
        throw ConfigError("field gradient frequency must be finite");
    }
}

double NoiseModel::motional_coherence(double dwell_us) const {
    if (dwell_us < 0.0) {
        throw ConfigError("dwell time must be non-negative");
    }
    double x = dwell_us / (motional_coherence_time_us * motional_tau_scale);
    return motional_decay_shape == DecayShape::Exponential ? std::exp(-x) : std::exp(-x * x);
}

CMatrix carrier_rotation(double theta, double phi) {
    const double c = std::cos(theta / 2.0);
    const double s = std::sin(theta / 2.0);
    CMatrix r(2, 2);
    r << c, -kI * std::exp(-kI * phi) * s, -kI * std::exp(kI * phi) * s, c;
    return r;
}

CMatrix level_rotation(std::size_t levels, LevelPair pair, double theta, double phi) {
    if (pair.first >= levels || pair.second >= levels || pair.first == pair.second) {
        throw ConfigError("invalid level pair for a " + std::to_string(levels) + "-level qudit");
    }
    CMatrix u = CMatrix::Identity(eidx(levels), eidx(levels));
    CMatrix r = carrier_rotation(theta, phi);
    const auto a = eidx(pair.first);
    const auto b = eidx(pair.second);
    u(a, a) = r(0, 0);
    u(a, b) = r(0, 1);
    u(b, a) = r(1, 0);
    u(b, b) = r(1, 1);
    return u;
}

CMatrix sideband_rotation(double theta_nominal, double phi, std::size_t qudit_levels, std::size_t cutoff) {
    if (cutoff < 1) {
        throw ConfigError("sideband rotation needs a mode cutoff of at least 1");
    }
    if (qudit_levels < 2) {
        throw ConfigError("sideband rotation needs at least the Up/Down levels");
    }
    const std::size_t nm = cutoff + 1;
    const std::size_t dim = qudit_levels * nm;
    CMatrix u = CMatrix::Identity(eidx(dim), eidx(dim));
    for (std::size_t n = 0; n < cutoff; n++) {
        const double theta_n = theta_nominal * std::sqrt(static_cast<double>(n + 1));
        CMatrix r = carrier_rotation(theta_n, phi);
        const auto up = eidx(level::kUp * nm + n + 1);
        const auto down = eidx(level::kDown * nm + n);
        u(up, up) = r(0, 0);
        u(up, down) = r(0, 1);
        u(down, up) = r(1, 0);
        u(down, down) = r(1, 1);
    }
    return u;
}

CMatrix two_qubit_phase_gate() {
    CMatrix g = CMatrix::Zero(4, 4);
    g(0, 0) = 1.0;
    g(1, 1) = kI;
    g(2, 2) = kI;
    g(3, 3) = 1.0;
    return g;
}

void apply_rotation(QuantumState &state, const Rotation &rotation, double angle_factor) {
    rotation.validate();
    const double theta = rotation.theta * angle_factor;
    for (const auto &ion : rotation.ions) {
        const auto &spec = state.reg().at(ion);
        if (spec.kind != SubsystemKind::IonQudit) {
            throw ConfigError("'" + ion + "' is not an ion qudit");
        }
        if (rotation.kind == RotationKind::Sideband) {
            const auto &mode = state.reg().at(rotation.mode);
            if (mode.kind != SubsystemKind::BosonMode) {
                throw ConfigError("'" + rotation.mode + "' is not a motional mode");
            }
            auto op = kernels::SparseOperator::from_dense(
                sideband_rotation(theta, rotation.phi, spec.dimension, mode.dimension - 1));
            apply_unitary(state, op, {ion, rotation.mode});
        } else {
            auto op = kernels::SparseOperator::from_dense(level_rotation(spec.dimension, rotation.levels, theta, rotation.phi));
            apply_unitary(state, op, {ion});
        }
    }
}

QuantumState apply_sideband(const QuantumState &state, const std::string &ion, const std::string &mode,
                            double theta_nominal, double phi) {
    Rotation r;
    r.kind = RotationKind::Sideband;
    r.ions = {ion};
    r.mode = mode;
    r.theta = theta_nominal;
    r.phi = phi;
    QuantumState out = state;
    apply_rotation(out, r);
    return out;
}

double werner_weight(double fidelity) {
    if (!(fidelity >= 0.25 && fidelity <= 1.0)) {
        throw ConfigError("Werner-form preparation needs fidelity in [0.25, 1]");
    }
    return (4.0 * fidelity - 1.0) / 3.0;
}

QuantumState prepare_psi_plus(const NoiseModel &noise, std::size_t qudit_levels, const std::string &ion_a,
                              const std::string &ion_b) {
    const double p = werner_weight(noise.prep_fidelity);
    Register reg({SubsystemSpec::qudit(ion_a, qudit_levels), SubsystemSpec::qudit(ion_b, qudit_levels)});
    const auto idx = [&](std::size_t a, std::size_t b) { return eidx(a * qudit_levels + b); };

    CMatrix rho = CMatrix::Zero(eidx(reg.total_dimension()), eidx(reg.total_dimension()));
    const auto ud = idx(level::kUp, level::kDown);
    const auto du = idx(level::kDown, level::kUp);
    rho(ud, ud) += 0.5 * p;
    rho(du, du) += 0.5 * p;
    rho(ud, du) += 0.5 * p;
    rho(du, ud) += 0.5 * p;
    for (auto a : {level::kUp, level::kDown}) {
        for (auto b : {level::kUp, level::kDown}) {
            rho(idx(a, b), idx(a, b)) += 0.25 * (1.0 - p);
        }
    }
    return QuantumState(std::move(reg), std::move(rho));
}

void scale_mode_coherences(QuantumState &state, const std::string &mode, double factor) {
    const auto &spec = state.reg().at(mode);
    if (spec.kind != SubsystemKind::BosonMode) {
        throw ConfigError("'" + mode + "' is not a motional mode");
    }
    if (factor == 1.0) {
        return;
    }
    const auto d = eidx(spec.dimension);
    CMatrix mask = CMatrix::Constant(d, d, cd(factor, 0.0));
    mask.diagonal().setOnes();
    kernels::hadamard_local(state.mutable_matrix(), mask, state.reg().target_map({mode}));
}

QuantumState motional_dephasing(const QuantumState &state, const std::string &mode, double dwell_us,
                                const NoiseModel &noise) {
    QuantumState out = state;
    scale_mode_coherences(out, mode, noise.motional_coherence(dwell_us));
    return out;
}

QuantumState sympathetic_cooling_reset(const QuantumState &state, const std::string &mode, double target_nbar) {
    const auto &spec = state.reg().at(mode);
    if (spec.kind != SubsystemKind::BosonMode) {
        throw ConfigError("'" + mode + "' is not a motional mode");
    }
    return replace_subsystems(state, {mode}, thermal_mode_state(target_nbar, spec.dimension - 1, mode));
}

CMatrix free_precession(std::size_t qudit_levels, double detuning_hz, double dwell_us) {
    const double phase = 2.0 * pi * detuning_hz * dwell_us * 1e-6;
    CMatrix u = CMatrix::Identity(eidx(qudit_levels), eidx(qudit_levels));
    u(eidx(level::kUp), eidx(level::kUp)) = std::exp(-kI * (phase / 2.0));
    u(eidx(level::kDown), eidx(level::kDown)) = std::exp(kI * (phase / 2.0));
    return u;
}

void apply_precession(QuantumState &state, const std::string &ion, double detuning_hz, double dwell_us) {
    if (detuning_hz == 0.0 || dwell_us == 0.0) {
        return;
    }
    const auto &spec = state.reg().at(ion);
    CMatrix u = free_precession(spec.dimension, detuning_hz, dwell_us);
    // Diagonal unitary: rho_ij *= u_i conj(u_j).
    CVector d = u.diagonal();
    CMatrix factors = d * d.adjoint();
    kernels::hadamard_local(state.mutable_matrix(), factors, state.reg().target_map({ion}));
}

std::vector<CMatrix> spin_depolarizing_kraus(double p, std::size_t qudit_levels) {
    if (!is_probability(p)) {
        throw ConfigError("depolarizing probability must lie in [0, 1]");
    }
    const auto d = eidx(qudit_levels);
    const auto up = eidx(level::kUp);
    const auto dn = eidx(level::kDown);
    std::vector<CMatrix> ks;

    CMatrix k0 = CMatrix::Identity(d, d);
    k0(up, up) = std::sqrt(1.0 - 0.75 * p);
    k0(dn, dn) = std::sqrt(1.0 - 0.75 * p);
    ks.push_back(k0);
    if (p == 0.0) {
        return ks;
    }
    const double a = std::sqrt(p / 4.0);
    CMatrix x = CMatrix::Zero(d, d), y = CMatrix::Zero(d, d), z = CMatrix::Zero(d, d);
    x(up, dn) = a;
    x(dn, up) = a;
    y(up, dn) = -kI * a;
    y(dn, up) = kI * a;
    z(up, up) = a;
    z(dn, dn) = -a;
    ks.push_back(x);
    ks.push_back(y);
    ks.push_back(z);
    return ks;
}

ShotJitter sample_shot_jitter(const NoiseModel &noise, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    ShotJitter j;
    if (noise.intensity_jitter_rms > 0.0) {
        std::normal_distribution<double> dist(1.0, noise.intensity_jitter_rms);
        j.angle_factor = dist(rng);
    }
    if (noise.uniform_field_jitter_rms_hz > 0.0) {
        std::normal_distribution<double> dist(0.0, noise.uniform_field_jitter_rms_hz);
        j.uniform_detuning_hz = dist(rng);
    }
    return j;
}

std::pair<std::vector<double>, std::vector<double>> gauss_hermite_normal(std::size_t n) {
    if (n == 0) {
        throw ConfigError("quadrature needs at least one node");
    }
    // Golub-Welsch on the Jacobi matrix of the probabilists' Hermite polynomials.
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(eidx(n), eidx(n));
    for (std::size_t k = 1; k < n; k++) {
        j(eidx(k - 1), eidx(k)) = std::sqrt(static_cast<double>(k));
        j(eidx(k), eidx(k - 1)) = std::sqrt(static_cast<double>(k));
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
    std::vector<double> nodes(n), weights(n);
    for (std::size_t k = 0; k < n; k++) {
        nodes[k] = es.eigenvalues()(eidx(k));
        const double v0 = es.eigenvectors()(0, eidx(k));
        weights[k] = v0 * v0;
    }
    return {nodes, weights};
}

std::vector<std::pair<ShotJitter, double>> jitter_quadrature(const NoiseModel &noise, std::size_t intensity_nodes,
                                                             std::size_t detuning_nodes) {
    auto axis = [](double width, std::size_t n) {
        if (width <= 0.0) {
            return std::pair<std::vector<double>, std::vector<double>>{{0.0}, {1.0}};
        }
        return gauss_hermite_normal(n);
    };
    auto [xi, wi] = axis(noise.intensity_jitter_rms, intensity_nodes);
    auto [xd, wd] = axis(noise.uniform_field_jitter_rms_hz, detuning_nodes);
    std::vector<std::pair<ShotJitter, double>> rule;
    for (std::size_t a = 0; a < xi.size(); a++) {
        for (std::size_t b = 0; b < xd.size(); b++) {
            ShotJitter j;
            j.angle_factor = 1.0 + noise.intensity_jitter_rms * xi[a];
            j.uniform_detuning_hz = noise.uniform_field_jitter_rms_hz * xd[b];
            rule.emplace_back(j, wi[a] * wd[b]);
        }
    }
    return rule;
}

}  // namespace emo
