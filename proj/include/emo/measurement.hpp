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

// Fluorescence readout: photon-count simulation, maximum-likelihood class
// populations, parity, the harmonic parity fit and the entanglement witness.

#ifndef EMO_MEASUREMENT_HPP
#define EMO_MEASUREMENT_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "emo/qstate.hpp"

namespace emo {

/// Poisson means per ion for one detection window.
struct DetectionModel {
    double bright_mean = 10.0;
    double dark_mean = 0.2;
    /// |2,-1> scatters a little during detection.
    double intermediate_mean = 1.0;
    double window_us = 200.0;
    /// Both ions on one counter (true) or resolved per ion (false).
    bool combined = true;

    void validate() const;
};

/// Per-ion fluorescence class of a hyperfine level.
enum class IonClass : std::size_t { Bright = 0, Intermediate = 1, Dark = 2 };
IonClass ion_class(std::size_t level);
double class_mean(const DetectionModel &detection, IonClass c);

/// Joint class probabilities of two ions, index 3 * class_a + class_b.
using JointClassProbabilities = std::array<double, 9>;

/// Reads the class probabilities off the diagonal of the two ions' reduced
/// state. Other subsystems are traced out.
JointClassProbabilities joint_class_probabilities(const QuantumState &state, const std::string &ion_a = "Be_A",
                                                  const std::string &ion_b = "Be_B");

/// Populations deduced from fluorescence. `p_mixed` is P(up,down) + P(down,up);
/// `residual` collects shots where an ion sat in the weakly fluorescing shelf
/// while the other was dark.
struct PopulationEstimate {
    double p_up_up = 0.0;
    double p_down_down = 0.0;
    double p_mixed = 0.0;
    double residual = 0.0;
    /// Over (p_up_up, p_down_down, p_mixed).
    Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();
    std::size_t shots = 0;
};

/// Exact populations of a class distribution (no sampling, zero covariance).
PopulationEstimate populations_from_classes(const JointClassProbabilities &p);

/// Combined-counter counts: per shot a joint class is drawn from `p`, then a
/// Poisson count with the sum of both ions' means. Independent of the thread
/// count for a given seed.
std::vector<std::uint32_t> simulate_counts(const JointClassProbabilities &p, const DetectionModel &detection,
                                           std::size_t shots, std::uint64_t seed);
std::vector<std::uint32_t> simulate_counts(const QuantumState &state, const DetectionModel &detection,
                                           std::size_t shots, std::uint64_t seed);
/// Per-ion counts (one counter per ion).
std::vector<std::array<std::uint32_t, 2>> simulate_counts_per_ion(const JointClassProbabilities &p,
                                                                   const DetectionModel &detection,
                                                                   std::size_t shots, std::uint64_t seed);

/// Maximum-likelihood class weights on the simplex. Combined counts use the
/// classes 2-bright, 1-bright, 0-bright and residual (intermediate + dark).
/// Throws ConfigError for empty input or indistinguishable class means.
PopulationEstimate ml_populations(const std::vector<std::uint32_t> &counts, const DetectionModel &detection);
/// Per-ion counts use all nine joint classes.
PopulationEstimate ml_populations(const std::vector<std::array<std::uint32_t, 2>> &counts,
                                  const DetectionModel &detection);

/// P(down,down) + P(up,up) - P(mixed); the residual class is left out.
double parity(const PopulationEstimate &p);
/// sqrt(g^T C g) with g = (1, 1, -1), floored at 1 / shots so that vertex
/// estimates keep a finite fit weight. Zero for an exact (shot-free) estimate.
double parity_std_error(const PopulationEstimate &p);

struct ParityPoint {
    double phi_p = 0.0;
    double parity = 0.0;
    double std_error = 0.0;
    std::size_t shots = 0;
};

ParityPoint parity_point(double phi_p, const PopulationEstimate &p);

/// C2 cos(2 phi + phi2) + C1 cos(phi + phi1) + C0.
struct FitResult {
    double C2 = 0.0;
    double C1 = 0.0;
    double C0 = 0.0;
    double phi2 = 0.0;
    double phi1 = 0.0;
    /// Over (C2, C1, C0, phi2, phi1).
    Eigen::Matrix<double, 5, 5> cov = Eigen::Matrix<double, 5, 5>::Zero();
    double residual_rms = 0.0;

    double evaluate(double phi) const;
    /// sqrt of the covariance diagonal, same order as `cov`.
    std::array<double, 5> uncertainties() const;
};

/// Linear least squares on {cos 2phi, sin 2phi, cos phi, sin phi, 1}, weighted
/// by 1/std_error^2. If any std_error is not positive the fit is unweighted and
/// the covariance is scaled by RSS / (N - 5). Throws FitError with fewer than
/// five distinct phases or a rank-deficient design.
FitResult fit_parity(const std::vector<ParityPoint> &points);

struct WitnessResult {
    bool entangled = false;
    double margin = 0.0;
};

/// Entangled iff C2 > 0.5 (strict); margin = C2 - 0.5.
WitnessResult entanglement_witness(const FitResult &fit);

// ---- file formats ---------------------------------------------------------

/// CSV with header `phi_p,parity,std_error,shots`, full double precision.
std::string parity_csv(const std::vector<ParityPoint> &points);
std::vector<ParityPoint> parse_parity_csv(const std::string &text);
void write_parity_csv(const std::string &path, const std::vector<ParityPoint> &points);
std::vector<ParityPoint> read_parity_csv(const std::string &path);

/// JSON object with exactly the keys C2, C1, C0, phi2, phi1, cov, entangled.
std::string fit_json(const FitResult &fit);
FitResult parse_fit_json(const std::string &text);

std::string populations_json(const PopulationEstimate &p);

}  // namespace emo

#endif
