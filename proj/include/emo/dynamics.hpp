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

// Laser-pulse unitaries, the black-box entangled-state preparation, and the
// calibrated noise channels.

#ifndef EMO_DYNAMICS_HPP
#define EMO_DYNAMICS_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "emo/qstate.hpp"

namespace emo {

/// Hyperfine levels of a 9Be+ ion kept in the qudit, in index order.
/// Up = |F=2,mF=2>, Down = |2,1>, then the auxiliary shelf levels.
namespace level {
constexpr std::size_t kUp = 0;
constexpr std::size_t kDown = 1;
constexpr std::size_t kF2m0 = 2;
constexpr std::size_t kF2mMinus1 = 3;
constexpr std::size_t kF2mMinus2 = 4;
constexpr std::size_t kCount = 5;
}  // namespace level

/// Ordered pair a carrier pulse rotates between. `first` maps to the upper
/// row of the rotation matrix.
struct LevelPair {
    std::size_t first = level::kUp;
    std::size_t second = level::kDown;
    bool operator==(const LevelPair &) const = default;
};

enum class RotationKind { Carrier, Sideband, Shelving };

struct Rotation {
    RotationKind kind = RotationKind::Carrier;
    std::vector<std::string> ions;
    /// Required for sideband pulses.
    std::string mode;
    double theta = 0.0;
    double phi = 0.0;
    LevelPair levels;
    double duration_us = 1.0;

    /// Throws ConfigError unless theta in [0, 2pi], duration > 0 and a sideband
    /// has a mode.
    void validate() const;
};

enum class DecayShape { Exponential, Gaussian };

/// Calibrated imperfection parameters. Defaults are the experimental budget.
struct NoiseModel {
    double prep_fidelity = 0.88;
    double motional_coherence_time_us = 800.0;
    DecayShape motional_decay_shape = DecayShape::Gaussian;
    /// Multiplies the coherence time inside the decay law. sqrt(2) turns the
    /// gaussian into exp(-t^2 / (2 tau^2)), which reproduces the quoted ~5 % and
    /// ~3 % parity-contrast losses for the 250/50 us and 176 us dwell times.
    double motional_tau_scale = 1.4142135623730951;
    double intensity_jitter_rms = 0.02;
    double field_gradient_hz = 1000.0;
    double uniform_field_jitter_rms_hz = 100.0;
    double scatter_error_per_transfer = 0.09;
    double cooled_nbar_a = 0.06;
    double cooled_nbar_b = 0.02;
    /// Placeholder for the unknown motional excitation left by separation.
    double separation_nbar = 2.0;

    /// Everything off; the field gradient stays (it is deterministic and compensated).
    static NoiseModel ideal();
    /// Only the residual thermal occupation after sympathetic cooling.
    static NoiseModel thermal_only();

    void validate() const;

    /// Coherence factor D(t) applied to Fock-state off-diagonals after dwell t.
    double motional_coherence(double dwell_us) const;
};

/// Per-shot classical draws.
struct ShotJitter {
    double angle_factor = 1.0;
    double uniform_detuning_hz = 0.0;
};

/// [[cos(t/2), -i e^{-i phi} sin(t/2)], [-i e^{i phi} sin(t/2), cos(t/2)]]
CMatrix carrier_rotation(double theta, double phi);

/// carrier_rotation embedded on `pair` of a `levels`-dimensional qudit.
CMatrix level_rotation(std::size_t levels, LevelPair pair, double theta, double phi);

/// Unitary on qudit (x) mode coupling |Up, n+1> <-> |Down, n> with angle
/// theta_nominal * sqrt(n + 1). |Up, 0>, |Down, cutoff> and every shelf level are
/// fixed. Basis index = level * (cutoff + 1) + n.
CMatrix sideband_rotation(double theta_nominal, double phi, std::size_t qudit_levels, std::size_t cutoff);

/// Ideal two-qubit phase gate diag(1, i, i, 1) on (Up,Down) x (Up,Down).
CMatrix two_qubit_phase_gate();

/// Applies a pulse to `state`, scaling the angle by `angle_factor`.
/// Throws ConfigError if an ion or mode label is absent.
void apply_rotation(QuantumState &state, const Rotation &rotation, double angle_factor = 1.0);

/// Sideband pulse on (ion, mode) of a register.
QuantumState apply_sideband(const QuantumState &state, const std::string &ion, const std::string &mode,
                            double theta_nominal, double phi);

/// Werner-form |Psi+> = (|UpDown> + |DownUp>)/sqrt(2) with fidelity
/// `noise.prep_fidelity`, on two qudits labelled `ion_a`, `ion_b`.
QuantumState prepare_psi_plus(const NoiseModel &noise, std::size_t qudit_levels = level::kCount,
                              const std::string &ion_a = "Be_A", const std::string &ion_b = "Be_B");
/// Werner weight p solving F = p + (1 - p) / 4.
double werner_weight(double fidelity);

/// Scales off-diagonal Fock coherences of `mode` by D(dwell).
QuantumState motional_dephasing(const QuantumState &state, const std::string &mode, double dwell_us,
                                const NoiseModel &noise);
/// Scales the coherences by `factor` in place (factor in [0,1]).
void scale_mode_coherences(QuantumState &state, const std::string &mode, double factor);

/// Replaces `mode` by a thermal state at `target_nbar`, leaving all other
/// subsystems (including spin coherences) untouched.
QuantumState sympathetic_cooling_reset(const QuantumState &state, const std::string &mode, double target_nbar);

/// Free precession of an ion under detuning (Hz) for `dwell_us`:
/// Up -> e^{-i delta t / 2}, Down -> e^{+i delta t / 2}, shelf levels unchanged.
CMatrix free_precession(std::size_t qudit_levels, double detuning_hz, double dwell_us);
void apply_precession(QuantumState &state, const std::string &ion, double detuning_hz, double dwell_us);

/// Depolarizing channel of strength p on the (Up, Down) subspace of a qudit;
/// shelf levels pass through.
std::vector<CMatrix> spin_depolarizing_kraus(double p, std::size_t qudit_levels = level::kCount);

ShotJitter sample_shot_jitter(const NoiseModel &noise, std::uint64_t seed);

/// Product Gauss-Hermite rule over (angle factor, uniform detuning):
/// E[f(jitter)] ~= sum_k w_k f(node_k). Zero-width axes collapse to one node.
std::vector<std::pair<ShotJitter, double>> jitter_quadrature(const NoiseModel &noise, std::size_t intensity_nodes = 7,
                                                             std::size_t detuning_nodes = 3);

/// Nodes and weights of the probabilists' Gauss-Hermite rule (standard normal).
std::pair<std::vector<double>, std::vector<double>> gauss_hermite_normal(std::size_t n);

}  // namespace emo

#endif
