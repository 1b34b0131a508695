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


#include <chrono>
#include <cmath>

#include <gtest/gtest.h>

#include "emo/errors.hpp"
#include "emo/modes.hpp"
#include "generators.hpp"

namespace emo {
namespace {

constexpr double kAmu = 1.66053906660e-27;
constexpr double kHbar = 1.054571817e-34;
constexpr double kCoulomb = 8.9875517923e9 * 1.602176634e-19 * 1.602176634e-19;  // e^2 / (4 pi eps0)

double spring_constant(const IonChainConfig &c) {
    const double w = 2 * M_PI * c.axial_frequency_mhz * 1e6;
    return c.reference_mass_amu * kAmu * w * w;
}

void expect_orthonormal(const ModeSolution &s, double tol) {
    const std::size_t n = s.mode_vectors.size();
    for (std::size_t a = 0; a < n; a++) {
        for (std::size_t b = 0; b < n; b++) {
            double dot = 0;
            for (std::size_t i = 0; i < n; i++) dot += s.mode_vectors[a][i] * s.mode_vectors[b][i];
            EXPECT_NEAR(dot, a == b ? 1.0 : 0.0, tol);
        }
    }
}

TEST(Equilibrium, SingleIonSitsAtCenter) {
    const auto x = equilibrium_positions(IonChainConfig::single_well({"Be"}, 2.0));
    ASSERT_EQ(x.size(), 1u);
    EXPECT_NEAR(x[0], 0.0, 1e-15);
}

TEST(Equilibrium, TwoIonForceBalance) {
    const auto cfg = IonChainConfig::single_well({"Be", "Be"}, 2.0);
    const auto x = equilibrium_positions(cfg);
    // k d / 2 = e^2 / (4 pi eps0 d^2)
    const double d = std::cbrt(2 * kCoulomb / spring_constant(cfg));
    EXPECT_NEAR(x[1] - x[0], d, 1e-12 * d * 1e3);
    EXPECT_NEAR(x[0] + x[1], 0.0, 1e-15);
}

TEST(Equilibrium, BeMgSpacingAboutFourMicrons) {
    const auto cfg = calibrate_curvature(IonChainConfig::single_well({"Be", "Mg"}, 2.0), 0, 2.3);
    const auto x = equilibrium_positions(cfg);
    EXPECT_NEAR((x[1] - x[0]) * 1e6, 4.0, 0.6);
}

TEST(EquilibriumProperty, MassIndependent) {
    const auto a = IonChainConfig::single_well({"Be", "Mg", "Mg", "Be"}, 2.0);
    const auto b = IonChainConfig::single_well({"Mg", "Be", "Be", "Mg"}, 2.0);
    const auto xa = equilibrium_positions(a);
    const auto xb = equilibrium_positions(b);
    for (std::size_t i = 0; i < xa.size(); i++) EXPECT_NEAR(xa[i], xb[i], 1e-12 * 1e-5);
}

TEST(NormalModes, EqualMassSqrtThree) {
    const auto s = axial_normal_modes(IonChainConfig::single_well({"Be", "Be"}, 1.7));
    EXPECT_NEAR(s.frequencies_mhz[1] / s.frequencies_mhz[0], std::sqrt(3.0), 1e-9);
    EXPECT_NEAR(s.frequencies_mhz[0], 1.7, 1e-9);
}

TEST(NormalModes, BeMgPair) {
    const auto start = std::chrono::steady_clock::now();
    const auto cfg = calibrate_curvature(IonChainConfig::single_well({"Be", "Mg"}, 2.0), 0, 2.3);
    const auto s = axial_normal_modes(cfg);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    EXPECT_NEAR(s.frequencies_mhz[0], 2.3, 2.3e-6);
    EXPECT_NEAR(s.frequencies_mhz[1], 4.9, 0.02 * 4.9);
    const double common[2] = {0.37, 0.93}, stretch[2] = {-0.93, 0.37};
    const double sc = s.mode_vectors[0][0] > 0 ? 1 : -1;
    const double ss = s.mode_vectors[1][0] * stretch[0] > 0 ? 1 : -1;
    for (int i = 0; i < 2; i++) {
        EXPECT_NEAR(sc * s.mode_vectors[0][i], common[i], 0.02);
        EXPECT_NEAR(ss * s.mode_vectors[1][i], stretch[i], 0.02);
    }
    EXPECT_LT(secs, 1.0);
}

TEST(NormalModesProperty, StructureOfRandomChains) {
    testing::Rng rng(31);
    const char *names[] = {"Be", "Mg"};
    for (int trial = 0; trial < 25; trial++) {
        std::vector<std::string> chain;
        const std::size_t n = testing::uniform_index(rng, 1, 5);
        for (std::size_t i = 0; i < n; i++) chain.push_back(names[testing::uniform_index(rng, 0, 1)]);
        const auto cfg = IonChainConfig::single_well(chain, testing::uniform(rng, 0.5, 4.0));
        const auto s = axial_normal_modes(cfg);
        expect_orthonormal(s, 1e-9);
        // H = V^T diag(w^2) V
        Eigen::MatrixXd v(n, n);
        Eigen::VectorXd w2(n);
        for (std::size_t k = 0; k < n; k++) {
            w2(static_cast<Eigen::Index>(k)) = s.frequencies_mhz[k] * s.frequencies_mhz[k];
            for (std::size_t i = 0; i < n; i++) v(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) = s.mode_vectors[k][i];
        }
        const Eigen::MatrixXd rebuilt = v.transpose() * w2.asDiagonal() * v;
        EXPECT_LT((rebuilt - s.mass_weighted_hessian).norm() / s.mass_weighted_hessian.norm(), 1e-8);
        for (std::size_t k = 0; k + 1 < n; k++) EXPECT_LT(s.frequencies_mhz[k], s.frequencies_mhz[k + 1]);
        for (std::size_t k = 0; k < n; k++) {
            const double w = 2 * M_PI * s.frequencies_mhz[k] * 1e6;
            for (std::size_t i = 0; i < n; i++) {
                const double m = cfg.ions[i].mass_amu * kAmu;
                EXPECT_NEAR(s.ground_state_sizes_m[k][i], s.mode_vectors[k][i] * std::sqrt(kHbar / (2 * m * w)), 1e-22);
            }
        }
        if (n == 2) {
            EXPECT_GT(s.mode_vectors[0][0], 0);
            EXPECT_GT(s.mode_vectors[0][1], 0);
            EXPECT_LT(s.mode_vectors[1][0] * s.mode_vectors[1][1], 0);
        }
    }
}

TEST(Calibration, SingleIonAndFixedPoint) {
    const auto one = calibrate_curvature(IonChainConfig::single_well({"Be"}, 3.3), 0, 2.0);
    EXPECT_NEAR(axial_normal_modes(one).frequencies_mhz[0], 2.0, 2e-6);
    const auto pair = calibrate_curvature(IonChainConfig::single_well({"Be", "Mg"}, 2.0), 0, 2.3);
    EXPECT_NEAR(axial_normal_modes(pair).frequencies_mhz[0] / 2.3, 1.0, 1e-6);
    EXPECT_THROW(calibrate_curvature(pair, 5, 2.0), ConfigError);
    EXPECT_THROW(calibrate_curvature(pair, 0, -1.0), ConfigError);
}

TEST(Calibration, FrequenciesScaleAsSqrtCurvature) {
    auto cfg = IonChainConfig::single_well({"Be", "Mg", "Mg", "Be"}, 2.0);
    const auto base = axial_normal_modes(cfg);
    for (double scale : {0.5, 2.0, 3.7}) {
        auto c = cfg;
        c.axial_frequency_mhz = cfg.axial_frequency_mhz * std::sqrt(scale);  // curvature x scale
        const auto s = axial_normal_modes(c);
        for (std::size_t k = 0; k < 4; k++) {
            EXPECT_NEAR(s.frequencies_mhz[k] / base.frequencies_mhz[k], std::sqrt(scale), 1e-9);
        }
    }
}

TEST(Exchange, SymmetricWellsNearFiveHertz) {
    const auto pair = calibrate_curvature(IonChainConfig::single_well({"Be", "Mg"}, 2.0), 0, 2.3);
    const auto ex = interwell_exchange(IonChainConfig::double_well(0.24, pair.axial_frequency_mhz));
    EXPECT_GT(ex.exchange_rate_hz, 2.5);
    EXPECT_LT(ex.exchange_rate_hz, 10.0);
    EXPECT_NEAR(ex.detuning_hz, 0.0, 1e-6);
    EXPECT_LT(exchange_population_bound(ex.exchange_rate_hz, 25e3), 1e-6);
}

TEST(Exchange, SplittingFallsAsInverseCube) {
    const double f = 3.25;
    std::vector<double> d, s;
    for (double spacing = 0.2; spacing <= 1.0001; spacing += 0.1) {
        d.push_back(std::log(spacing));
        s.push_back(std::log(interwell_exchange(IonChainConfig::double_well(spacing, f)).splitting_hz));
    }
    for (std::size_t k = 1; k < s.size(); k++) EXPECT_LT(s[k], s[k - 1]);
    // least-squares slope
    const double n = static_cast<double>(d.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < d.size(); k++) {
        sx += d[k];
        sy += s[k];
        sxx += d[k] * d[k];
        sxy += d[k] * s[k];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    EXPECT_NEAR(slope, -3.0, 0.15);
}

TEST(Exchange, AsymmetricWellsDetuned) {
    const auto ex = interwell_exchange(IonChainConfig::double_well(0.24, 3.25, 1.01));
    EXPECT_GT(std::abs(ex.detuning_hz), 1e3);
}

TEST(Exchange, WellsTooClose) {
    EXPECT_THROW(interwell_exchange(IonChainConfig::double_well(0.005, 3.25)), ConfigError);
}

TEST(ExchangeFormula, BoundAndResonantTransfer) {
    EXPECT_DOUBLE_EQ(exchange_population_bound(5.0, 0.0), 1.0);
    EXPECT_NEAR(exchange_population_bound(5.0, 25e3) / 1.6e-7, 1.0, 0.03);
    const double p = exchange_transfer_probability(5.0, 0.0, 250e-6);
    EXPECT_NEAR(p, std::pow(std::sin(M_PI * 5.0 * 250e-6), 2), 1e-18);
    EXPECT_NEAR(p, 1.5e-5, 0.05e-5);
    // Finite time never exceeds the bound.
    for (double t : {1e-4, 1e-3, 1e-2}) {
        EXPECT_LE(exchange_transfer_probability(5.0, 100.0, t), exchange_population_bound(5.0, 100.0) + 1e-15);
    }
}

TEST(ChainConfig, Validation) {
    EXPECT_THROW(species::mass_amu("Ca"), ConfigError);
    IonChainConfig empty;
    EXPECT_THROW(empty.validate(), ConfigError);
    auto bad = IonChainConfig::single_well({"Be"}, 2.0);
    bad.ions[0].mass_amu = -1.0;
    EXPECT_THROW(bad.validate(), ConfigError);
    EXPECT_THROW(axial_normal_modes(bad), ConfigError);
}

}  // namespace
}  // namespace emo
