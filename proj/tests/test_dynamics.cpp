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


#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "emo/dynamics.hpp"
#include "emo/errors.hpp"
#include "generators.hpp"

namespace emo {
namespace {

using testing::Rng;

constexpr double kPi = M_PI;

Register two_ions(std::size_t levels = level::kCount) {
    return Register({SubsystemSpec::qudit("Be_A", levels), SubsystemSpec::qudit("Be_B", levels)});
}

Rotation carrier(std::vector<std::string> ions, double theta, double phi) {
    Rotation r;
    r.kind = RotationKind::Carrier;
    r.ions = std::move(ions);
    r.theta = theta;
    r.phi = phi;
    return r;
}

TEST(CarrierRotation, MatrixEntries) {
    EXPECT_LT((carrier_rotation(0.0, 1.3) - CMatrix::Identity(2, 2)).norm(), 1e-15);
    const CMatrix r = carrier_rotation(kPi, 0.0);
    // R(pi, 0)|up> = -i|down>
    EXPECT_NEAR(std::abs(r(1, 0) - cd(0, -1)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(r(0, 0)), 0.0, 1e-15);
    const double t = 0.7, p = -0.4;
    const CMatrix g = carrier_rotation(t, p);
    EXPECT_NEAR(std::abs(g(0, 1) - cd(0, -1) * std::polar(1.0, -p) * std::sin(t / 2)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(g(1, 0) - cd(0, -1) * std::polar(1.0, p) * std::sin(t / 2)), 0.0, 1e-15);
}

TEST(RotationProperty, UnitaryAndInvertedByPhaseShift) {
    Rng rng(21);
    for (int trial = 0; trial < 200; trial++) {
        const double t = testing::uniform(rng, 0, 2 * kPi);
        const double p = testing::uniform(rng, -4 * kPi, 4 * kPi);
        const CMatrix r = carrier_rotation(t, p);
        EXPECT_LT((r.adjoint() * r - CMatrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_LT((carrier_rotation(t, p + kPi) * r - CMatrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-12);
        const CMatrix s = sideband_rotation(t, p, level::kCount, 4);
        EXPECT_LT((s.adjoint() * s - CMatrix::Identity(25, 25)).cwiseAbs().maxCoeff(), 1e-12);
        const CMatrix l = level_rotation(level::kCount, {level::kF2m0, level::kF2mMinus1}, t, p);
        EXPECT_LT((l.adjoint() * l - CMatrix::Identity(5, 5)).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(CarrierRotation, CommonAnalysisRotationOfPsiPlus) {
    NoiseModel ideal = NoiseModel::ideal();
    auto s = prepare_psi_plus(ideal);
    apply_rotation(s, carrier({"Be_A", "Be_B"}, kPi / 2, -3 * kPi / 4));
    const Register reg = two_ions();
    PureState target{reg, CVector::Zero(25)};
    target.amplitudes(reg.basis_index({{"Be_A", level::kUp}, {"Be_B", level::kUp}})) = 1 / std::sqrt(2.0);
    target.amplitudes(reg.basis_index({{"Be_A", level::kDown}, {"Be_B", level::kDown}})) = cd(0, 1) / std::sqrt(2.0);
    EXPECT_NEAR(fidelity(s, target), 1.0, 1e-12);
}

TEST(SidebandRotation, GroundManifoldAndCarrierRescaling) {
    const std::size_t cutoff = 4;
    const CMatrix s = sideband_rotation(kPi, 0.0, level::kCount, cutoff);
    const auto idx = [&](std::size_t lvl, std::size_t n) { return static_cast<Eigen::Index>(lvl * (cutoff + 1) + n); };
    // |down,0> -> -i|up,1>
    EXPECT_NEAR(std::abs(s(idx(level::kUp, 1), idx(level::kDown, 0)) - cd(0, -1)), 0.0, 1e-15);
    // |up,0> and shelf levels are fixed points
    EXPECT_NEAR(std::abs(s(idx(level::kUp, 0), idx(level::kUp, 0)) - 1.0), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(s(idx(level::kF2m0, 2), idx(level::kF2m0, 2)) - 1.0), 0.0, 1e-15);
    // |down,1>: effective angle pi*sqrt(2)
    const double stay = std::norm(s(idx(level::kDown, 1), idx(level::kDown, 1)));
    const double oracle = std::pow(std::cos(kPi * std::sqrt(2.0) / 2), 2);
    EXPECT_NEAR(stay, oracle, 1e-12);
    EXPECT_NEAR(stay, 0.363, 0.005);
    EXPECT_NEAR(std::norm(s(idx(level::kUp, 2), idx(level::kDown, 1))), 1 - oracle, 1e-12);
}

TEST(SidebandProperty, ConservesExcitationNumber) {
    // Coupling |up,n+1> <-> |down,n> conserves N = n + P_down.
    Rng rng(22);
    const std::size_t cutoff = 4;
    const Register reg({SubsystemSpec::qudit("q", level::kCount), SubsystemSpec::mode("m", cutoff)});
    Eigen::VectorXd n_op(25);
    for (std::size_t lvl = 0; lvl < level::kCount; lvl++) {
        for (std::size_t n = 0; n <= cutoff; n++) {
            n_op(static_cast<Eigen::Index>(lvl * (cutoff + 1) + n)) = static_cast<double>(n) + (lvl == level::kDown);
        }
    }
    for (int trial = 0; trial < 50; trial++) {
        const QuantumState s(reg, testing::random_density(rng, 25));
        const double before = s.populations().dot(n_op);
        const auto after = apply_sideband(s, "q", "m", testing::uniform(rng, 0, 2 * kPi), testing::uniform(rng, -kPi, kPi));
        EXPECT_NEAR(after.populations().dot(n_op), before, 1e-12);
    }
}

TEST(SidebandRotation, MissingLabelsRejected) {
    const QuantumState s = prepare_psi_plus(NoiseModel::ideal());
    EXPECT_THROW(apply_sideband(s, "Be_A", "stretch_A", kPi, 0), ConfigError);
}

TEST(RotationValidate, Invariants) {
    Rotation r = carrier({"Be_A"}, kPi, 0);
    EXPECT_NO_THROW(r.validate());
    r.theta = 7.0;
    EXPECT_THROW(r.validate(), ConfigError);
    r.theta = 1.0;
    r.duration_us = 0.0;
    EXPECT_THROW(r.validate(), ConfigError);
    r.duration_us = 1.0;
    r.kind = RotationKind::Sideband;
    EXPECT_THROW(r.validate(), ConfigError);
}

TEST(Preparation, PerfectAndWerner) {
    const auto reg = two_ions();
    PureState psi{reg, CVector::Zero(25)};
    const auto ud = reg.basis_index({{"Be_A", level::kUp}, {"Be_B", level::kDown}});
    const auto du = reg.basis_index({{"Be_A", level::kDown}, {"Be_B", level::kUp}});
    psi.amplitudes(ud) = psi.amplitudes(du) = 1 / std::sqrt(2.0);
    EXPECT_NEAR(fidelity(prepare_psi_plus(NoiseModel::ideal()), psi), 1.0, 1e-15);

    NoiseModel n;
    n.prep_fidelity = 0.88;
    EXPECT_NEAR(werner_weight(0.88), 0.84, 1e-12);
    const auto w = prepare_psi_plus(n);
    EXPECT_NEAR(fidelity(w, psi), 0.88, 1e-12);
    EXPECT_NEAR(coherence_element(w, {{"Be_A", level::kUp}, {"Be_B", level::kDown}},
                                  {{"Be_A", level::kDown}, {"Be_B", level::kUp}})
                    .real(),
                0.42, 1e-12);
    EXPECT_THROW(werner_weight(0.2), ConfigError);
}

TEST(MotionalDephasing, DecayLaws) {
    NoiseModel n;
    n.motional_tau_scale = 1.0;
    n.motional_coherence_time_us = 800.0;
    n.motional_decay_shape = DecayShape::Gaussian;
    EXPECT_NEAR(n.motional_coherence(250.0), std::exp(-std::pow(250.0 / 800.0, 2)), 1e-15);
    EXPECT_NEAR(n.motional_coherence(250.0), 0.907, 5e-4);
    EXPECT_DOUBLE_EQ(n.motional_coherence(0.0), 1.0);
    n.motional_decay_shape = DecayShape::Exponential;
    EXPECT_NEAR(n.motional_coherence(800.0), std::exp(-1.0), 1e-15);
}

TEST(MotionalDephasing, ScalesOnlyOffDiagonalFock) {
    Rng rng(23);
    const Register reg({SubsystemSpec::qudit("q", 2), SubsystemSpec::mode("m", 3)});
    NoiseModel n;
    n.motional_tau_scale = 1.0;
    n.motional_decay_shape = DecayShape::Exponential;
    for (int trial = 0; trial < 20; trial++) {
        const QuantumState s(reg, testing::random_density(rng, reg.total_dimension()));
        const double t = testing::uniform(rng, 0, 2000);
        const auto out = motional_dephasing(s, "m", t, n);
        EXPECT_LT((out.populations() - s.populations()).cwiseAbs().maxCoeff(), 1e-15);
        const double f = std::exp(-t / n.motional_coherence_time_us);
        for (Eigen::Index i = 0; i < 8; i++) {
            for (Eigen::Index j = 0; j < 8; j++) {
                const bool same_fock = reg.digits(static_cast<std::size_t>(i))[1] == reg.digits(static_cast<std::size_t>(j))[1];
                const cd expect = same_fock ? s.matrix()(i, j) : f * s.matrix()(i, j);
                EXPECT_NEAR(std::abs(out.matrix()(i, j) - expect), 0.0, 1e-14);
            }
        }
    }
    const QuantumState s0(reg, testing::random_density(rng, 8));
    EXPECT_THROW(motional_dephasing(s0, "m", -1.0, n), ConfigError);
}

TEST(CoolingReset, ResetsModeKeepsSpinAndIsIdempotent) {
    Rng rng(24);
    const Register reg({SubsystemSpec::qudit("q", 2), SubsystemSpec::mode("m", 3)});
    const QuantumState s(reg, testing::random_density(rng, 8));
    const auto once = sympathetic_cooling_reset(s, "m", 0.0);
    const auto mode = partial_trace(once, {"m"});
    EXPECT_NEAR(mode.matrix()(0, 0).real(), 1.0, 1e-12);
    EXPECT_LT((partial_trace(once, {"q"}).matrix() - partial_trace(s, {"q"}).matrix()).cwiseAbs().maxCoeff(), 1e-12);
    const auto warm = sympathetic_cooling_reset(s, "m", 0.06);
    const auto twice = sympathetic_cooling_reset(warm, "m", 0.06);
    EXPECT_LT((twice.matrix() - warm.matrix()).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_THROW(sympathetic_cooling_reset(s, "nope", 0.0), ConfigError);
}

TEST(FieldNoise, UniformDetuningLeavesDfsCoherence) {
    Rng rng(25);
    NoiseModel perfect = NoiseModel::ideal();
    for (int trial = 0; trial < 20; trial++) {
        auto s = prepare_psi_plus(perfect);
        const cd before = coherence_element(s, {{"Be_A", level::kUp}, {"Be_B", level::kDown}},
                                            {{"Be_A", level::kDown}, {"Be_B", level::kUp}});
        const double delta = testing::uniform(rng, -5000, 5000);
        const double t = testing::uniform(rng, 0, 5000);
        apply_precession(s, "Be_A", delta, t);
        apply_precession(s, "Be_B", delta, t);
        const cd after = coherence_element(s, {{"Be_A", level::kUp}, {"Be_B", level::kDown}},
                                           {{"Be_A", level::kDown}, {"Be_B", level::kUp}});
        EXPECT_NEAR(std::abs(after - before), 0.0, 1e-12);
    }
}

TEST(FieldNoise, SpinEchoCancelsConstantDetuning) {
    Rng rng(26);
    const Register reg = two_ions();
    // Shelf levels do not precess, so the echo acts on the (up, down) block;
    // random states are drawn inside it.
    for (int trial = 0; trial < 20; trial++) {
        const CMatrix small = testing::random_density(rng, 4);
        CMatrix big = CMatrix::Zero(25, 25);
        const std::size_t sp[2] = {level::kUp, level::kDown};
        for (int i = 0; i < 4; i++) {
            for (int j = 0; j < 4; j++) {
                big(static_cast<Eigen::Index>(sp[i / 2] * 5 + sp[i % 2]), static_cast<Eigen::Index>(sp[j / 2] * 5 + sp[j % 2])) = small(i, j);
            }
        }
        const QuantumState start(reg, big);
        const double t = testing::uniform(rng, 10, 2000);
        const double da = testing::uniform(rng, -3000, 3000);
        const double db = testing::uniform(rng, -3000, 3000);
        auto run = [&](double a, double b) {
            QuantumState s = start;
            apply_precession(s, "Be_A", a, t);
            apply_precession(s, "Be_B", b, t);
            apply_rotation(s, carrier({"Be_A", "Be_B"}, kPi, 0.0));
            apply_precession(s, "Be_A", a, t);
            apply_precession(s, "Be_B", b, t);
            return s;
        };
        EXPECT_LT((run(da, db).matrix() - run(0.0, 0.0).matrix()).cwiseAbs().maxCoeff(), 1e-9);
    }
}

TEST(Depolarizing, KrausCompleteAndShelfUntouched) {
    const auto ks = spin_depolarizing_kraus(0.3);
    CMatrix sum = CMatrix::Zero(5, 5);
    for (const auto &k : ks) sum += k.adjoint() * k;
    EXPECT_LT((sum - CMatrix::Identity(5, 5)).cwiseAbs().maxCoeff(), 1e-12);
    const Register reg({SubsystemSpec::qudit("q", 5)});
    const auto shelf = apply_channel(basis_state(reg, {{"q", level::kF2mMinus1}}), ks, {"q"});
    EXPECT_NEAR(shelf.populations()(level::kF2mMinus1), 1.0, 1e-12);
    const auto up = apply_channel(basis_state(reg, {{"q", level::kUp}}), ks, {"q"});
    EXPECT_NEAR(up.populations()(level::kDown), 0.15, 1e-12);
}

TEST(ShotJitter, DeterministicAndCalibrated) {
    NoiseModel n;
    n.intensity_jitter_rms = 0.0;
    EXPECT_EQ(sample_shot_jitter(n, 99).angle_factor, 1.0);
    n = NoiseModel{};
    const auto a = sample_shot_jitter(n, 1234);
    const auto b = sample_shot_jitter(n, 1234);
    EXPECT_EQ(a.angle_factor, b.angle_factor);
    EXPECT_EQ(a.uniform_detuning_hz, b.uniform_detuning_hz);

    const int draws = 100000;
    double sum = 0, sum2 = 0;
    for (int k = 0; k < draws; k++) {
        const double f = sample_shot_jitter(n, static_cast<std::uint64_t>(k)).angle_factor;
        sum += f;
        sum2 += f * f;
    }
    const double mean = sum / draws;
    const double sd = std::sqrt(sum2 / draws - mean * mean);
    EXPECT_NEAR(sd, 0.02, 0.001);
    EXPECT_NEAR(mean, 1.0, 5 * 0.02 / std::sqrt(draws));
}

TEST(Quadrature, GaussHermiteMoments) {
    const auto [x, w] = gauss_hermite_normal(7);
    double m0 = 0, m2 = 0, m4 = 0, m6 = 0;
    for (std::size_t k = 0; k < x.size(); k++) {
        m0 += w[k];
        m2 += w[k] * std::pow(x[k], 2);
        m4 += w[k] * std::pow(x[k], 4);
        m6 += w[k] * std::pow(x[k], 6);
    }
    EXPECT_NEAR(m0, 1.0, 1e-12);
    EXPECT_NEAR(m2, 1.0, 1e-12);
    EXPECT_NEAR(m4, 3.0, 1e-11);
    EXPECT_NEAR(m6, 15.0, 1e-10);
    const auto nodes = jitter_quadrature(NoiseModel::ideal());
    ASSERT_EQ(nodes.size(), 1u);
    EXPECT_EQ(nodes[0].second, 1.0);
    EXPECT_EQ(jitter_quadrature(NoiseModel{}).size(), 21u);
}

TEST(NoiseModelValidate, RejectsOutOfRange) {
    NoiseModel n;
    EXPECT_NO_THROW(n.validate());
    n.scatter_error_per_transfer = 1.5;
    EXPECT_THROW(n.validate(), ConfigError);
    n = NoiseModel{};
    n.motional_coherence_time_us = -1.0;
    EXPECT_THROW(n.validate(), ConfigError);
}

}  // namespace
}  // namespace emo
