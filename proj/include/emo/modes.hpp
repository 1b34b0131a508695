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

// Axial equilibrium and normal modes of mixed-species ion chains held in one
// or two harmonic wells, plus the Coulomb exchange between pairs in separate
// wells.
//
// Internally lengths are in units of l0 = (e^2 / (4 pi eps0 k))^(1/3), where
// k = m_ref * w_ref^2 is the common axial spring constant (the axial potential
// does not depend on the ion mass). In these units a single-well Hessian has
// eigenvalues independent of k, and mode frequencies are w_ref * sqrt(lambda).

#ifndef EMO_MODES_HPP
#define EMO_MODES_HPP

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace emo {

namespace species {
constexpr double kBe9MassAmu = 9.0122;
constexpr double kMg24MassAmu = 23.9850;
/// Mass in u for "Be"/"Be9" and "Mg"/"Mg24"; throws ConfigError otherwise.
double mass_amu(const std::string &name);
}  // namespace species

struct Ion {
    std::string species;
    double mass_amu = species::kBe9MassAmu;
};

struct IonChainConfig {
    std::vector<Ion> ions;
    /// Axial frequency of a single reference ion (9Be+ by default) in a well
    /// of unit curvature scale. Sets the common spring constant.
    double axial_frequency_mhz = 2.0;
    double reference_mass_amu = species::kBe9MassAmu;
    std::vector<double> well_centers_mm{0.0};
    /// well_of_ion[i] indexes well_centers_mm; empty means every ion in well 0.
    std::vector<std::size_t> well_of_ion;
    /// Per-well multiplier on the spring constant; empty means all 1.
    std::vector<double> well_curvature_scale;

    /// Single well holding `names` (e.g. {"Be", "Mg", "Mg", "Be"}) in order.
    static IonChainConfig single_well(const std::vector<std::string> &names, double axial_frequency_mhz);
    /// Be-Mg in well A at -spacing/2, Mg-Be in well B at +spacing/2.
    static IonChainConfig double_well(double spacing_mm, double axial_frequency_mhz, double well_b_scale = 1.0);

    std::size_t well_count() const {
        return well_centers_mm.size();
    }
    std::size_t well_of(std::size_t ion) const;
    double curvature_scale(std::size_t well) const;

    void validate() const;
};

struct ModeSolution {
    std::vector<double> positions_m;
    /// Ascending.
    std::vector<double> frequencies_mhz;
    /// mode_vectors[k][i]: mass-weighted amplitude of ion i in mode k. Rows are
    /// orthonormal; each row's first nonzero entry is positive.
    std::vector<std::vector<double>> mode_vectors;
    /// ground_state_sizes_m[k][i] = mode_vectors[k][i] * sqrt(hbar / (2 m_i w_k)).
    std::vector<std::vector<double>> ground_state_sizes_m;
    /// Mass-weighted Hessian in MHz^2 (its eigenvalues are frequencies_mhz^2).
    Eigen::MatrixXd mass_weighted_hessian;
};

/// Axial equilibrium positions (m). Converges to a scaled gradient norm < 1e-12.
std::vector<double> equilibrium_positions(const IonChainConfig &config);

/// Throws InstabilityError when the Hessian has a non-positive eigenvalue.
ModeSolution axial_normal_modes(const IonChainConfig &config);

/// Root-solves the axial frequency so mode `mode_index` sits at `target_mhz`
/// (relative error < 1e-6).
IonChainConfig calibrate_curvature(const IonChainConfig &config, std::size_t mode_index, double target_mhz);

struct ExchangeResult {
    /// Splitting of the two stretch-like normal modes of the coupled system.
    double splitting_hz = 0.0;
    /// Rate r entering the resonant transfer probability sin^2(pi r t); equal to
    /// the normal-mode splitting.
    double exchange_rate_hz = 0.0;
    /// Difference between the two wells' isolated stretch frequencies.
    double detuning_hz = 0.0;
    ModeSolution modes;
};

/// Two wells, one Be-Mg pair each. Throws ConfigError when the wells are so
/// close that the pairs no longer form separate crystals.
ExchangeResult interwell_exchange(const IonChainConfig &double_well_config);

/// Population transferred after `time_s` between two coupled modes with exchange
/// rate g and detuning D (both Hz):
///   g^2 / (g^2 + (D/2)^2) * sin^2(pi * sqrt(g^2 + (D/2)^2) * t).
double exchange_transfer_probability(double exchange_rate_hz, double detuning_hz, double time_s);

/// Largest transfer reached within [0, time_s]; with the default infinite time
/// this is the bound g^2 / (g^2 + (D/2)^2).
double exchange_population_bound(double exchange_rate_hz, double detuning_hz,
                                 double time_s = std::numeric_limits<double>::infinity());

}  // namespace emo

#endif
