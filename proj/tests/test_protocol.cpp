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

#include <gtest/gtest.h>

#include "emo/errors.hpp"
#include "emo/protocol.hpp"

namespace emo {
namespace {

constexpr double kPi = M_PI;

NoiseModel gradient_only(double hz = 1000.0) {
    NoiseModel n = NoiseModel::ideal();
    n.field_gradient_hz = hz;
    return n;
}

const Checkpoint &find_checkpoint(const ExecutionResult &r, int id) {
    for (const auto &c : r.checkpoints) {
        if (c.id == id) return c;
    }
    throw std::runtime_error("checkpoint missing");
}

TEST(Plan, VariantStructure) {
    const auto emo = build_plan(Variant::Emo);
    const auto sm = build_plan(Variant::SpinMotion);
    EXPECT_GT(emo.steps.size(), sm.steps.size());
    EXPECT_EQ(emo.steps.size() - sm.steps.size(), 6u);  // seven steps become one delay
    bool has_hold = false;
    for (const auto &s : sm.steps) has_hold |= s.op == Operation::DephaseDwell && s.duration_us == 90.0;
    EXPECT_TRUE(has_hold);
    EXPECT_NEAR(emo.total_duration_us(), 14000.0, 1400.0);
    EXPECT_NO_THROW(emo.validate());
    EXPECT_NO_THROW(sm.validate());
    EXPECT_FALSE(build_plan(Variant::ControlAfterState4).analysis_step().has_value());
    EXPECT_TRUE(emo.analysis_step().has_value());
}

TEST(Plan, OverridesAndNames) {
    const auto p = build_plan(Variant::Emo, {}, PlanOverrides{0.3, std::nullopt});
    EXPECT_DOUBLE_EQ(p.analysis_phase, 0.3);
    EXPECT_EQ(p.steps[*p.analysis_step()].phase_ref, PhaseRef::Analysis);
    EXPECT_FALSE(p.compensation_phase.has_value());
    EXPECT_EQ(variant_from_string("spin-motion"), Variant::SpinMotion);
    EXPECT_EQ(variant_from_string("control5"), Variant::ControlAfterState5);
    EXPECT_THROW(variant_from_string("bogus"), ConfigError);
}

TEST(Plan, ValidateCatchesMissingTransfers) {
    auto p = build_plan(Variant::Emo);
    for (auto it = p.steps.begin(); it != p.steps.end(); ++it) {
        if (it->op == Operation::Rotation && it->rotation.kind == RotationKind::Sideband) {
            p.steps.erase(it);
            break;
        }
    }
    EXPECT_THROW(p.validate(), ConfigError);
}

TEST(PlanJson, RoundTrip) {
    for (auto v : {Variant::Emo, Variant::SpinMotion, Variant::ControlAfterState4, Variant::ControlAfterState5}) {
        const auto p = build_plan(v, {}, PlanOverrides{0.7, 0.25});
        const std::string text = plan_to_json(p);
        const auto back = plan_from_json(text);
        EXPECT_EQ(plan_to_json(back), text);
        EXPECT_EQ(back.steps.size(), p.steps.size());
        ASSERT_TRUE(back.compensation_phase.has_value());
        EXPECT_DOUBLE_EQ(*back.compensation_phase, 0.25);
    }
    EXPECT_THROW(plan_from_json("{\"variant\": \"emo\"}"), ConfigError);
    EXPECT_THROW(plan_from_json("not json"), ConfigError);
}

TEST(NoiseJson, RoundTripWithInfinity) {
    NoiseModel n;
    n.motional_coherence_time_us = std::numeric_limits<double>::infinity();
    n.motional_decay_shape = DecayShape::Exponential;
    const auto back = noise_from_json(noise_to_json(n));
    EXPECT_TRUE(std::isinf(back.motional_coherence_time_us));
    EXPECT_EQ(back.motional_decay_shape, DecayShape::Exponential);
    EXPECT_EQ(noise_to_json(back), noise_to_json(n));
    EXPECT_THROW(noise_from_json("{\"nope\": 1}"), ConfigError);
    EXPECT_THROW(noise_from_json("{\"prep_fidelity\": 2}"), ConfigError);
}

TEST(Execute, NoiselessCheckpointsAndTimeline) {
    const auto plan = build_plan(Variant::Emo);
    ExecutionOptions opts;
    opts.audit = AuditLevel::Full;
    opts.keep_checkpoint_states = true;
    const auto r = execute(plan, gradient_only(), 1, opts);
    ASSERT_EQ(r.checkpoints.size(), 5u);
    for (const auto &c : r.checkpoints) EXPECT_NEAR(c.fidelity, 1.0, 1e-9) << "checkpoint " << c.id;

    // Recompute checkpoint 5 against an independently built reference.
    const auto &c5 = find_checkpoint(r, 5);
    ASSERT_TRUE(c5.state.has_value());
    const Register reg = protocol_register();
    PureState ref{reg, CVector::Zero(static_cast<Eigen::Index>(reg.total_dimension()))};
    ref.amplitudes(reg.basis_index({{kIonA, 0}, {kIonB, 0}, {kModeA, 0}, {kModeB, 0}})) = 1 / std::sqrt(2.0);
    ref.amplitudes(reg.basis_index({{kIonA, 0}, {kIonB, 0}, {kModeA, 1}, {kModeB, 1}})) =
        -std::exp(cd(0, c5.xi)) / std::sqrt(2.0);
    EXPECT_NEAR(fidelity(*c5.state, ref), 1.0, 1e-9);

    // xi grows only while separated.
    EXPECT_LT(r.timeline.separated_us, r.timeline.elapsed_us);
    EXPECT_NEAR(r.timeline.xi, 2 * kPi * 1000.0 * r.timeline.separated_us * 1e-6, 1e-9);
    EXPECT_DOUBLE_EQ(find_checkpoint(r, 1).xi, 0.0);
    EXPECT_NEAR(r.timeline.mode_dwell_us.at(kModeA), 250.0, 25.0);
    EXPECT_NEAR(r.timeline.mode_dwell_us.at(kModeB), 50.0, 5.0);
}

TEST(Execute, CheckpointFourStructure) {
    ExecutionOptions opts;
    opts.keep_checkpoint_states = true;
    const auto r = execute(build_plan(Variant::Emo), gradient_only(), 1, opts);
    const auto &s = *find_checkpoint(r, 4).state;
    EXPECT_NEAR(partial_trace(s, {kIonA}).populations()(level::kUp), 1.0, 1e-12);
    EXPECT_NEAR(partial_trace(s, {kModeB}).populations()(0), 1.0, 1e-12);
    // Motion A is entangled with spin B: the (B, mode A) reduced state is pure
    // while each factor alone is maximally mixed on its two states.
    const auto bm = partial_trace(s, {kIonB, kModeA});
    EXPECT_NEAR((bm.matrix() * bm.matrix()).trace().real(), 1.0, 1e-12);
    EXPECT_NEAR(partial_trace(s, {kModeA}).populations()(1), 0.5, 1e-12);
}

TEST(Execute, EntanglementResidesInMotion) {
    ExecutionOptions opts;
    opts.keep_checkpoint_states = true;
    const auto r = execute(build_plan(Variant::Emo), gradient_only(), 1, opts);
    const auto &s = *find_checkpoint(r, 5).state;
    const auto spins = partial_trace(s, {kIonA, kIonB});
    EXPECT_NEAR(spins.populations()(0), 1.0, 1e-12);  // |up up>, a product state
    EXPECT_NEAR(std::abs(coherence_element(partial_trace(s, {kModeA, kModeB}), {{kModeA, 0}, {kModeB, 0}},
                                           {{kModeA, 1}, {kModeB, 1}})),
                0.5, 1e-12);
}

TEST(Execute, SpinMotionDwell) {
    const auto r = execute(build_plan(Variant::SpinMotion), gradient_only(), 1);
    EXPECT_NEAR(r.timeline.mode_dwell_us.at(kModeA), 176.0, 1e-9);
    for (const auto &c : r.checkpoints) EXPECT_NE(c.id, 5);
}

TEST(Execute, DeterministicForSeed) {
    const auto plan = build_plan(Variant::Emo);
    const auto a = execute(plan, NoiseModel{}, 42);
    const auto b = execute(plan, NoiseModel{}, 42);
    ASSERT_EQ(a.checkpoints.size(), b.checkpoints.size());
    for (std::size_t k = 0; k < a.checkpoints.size(); k++) {
        EXPECT_EQ(a.checkpoints[k].fidelity, b.checkpoints[k].fidelity);
    }
    EXPECT_EQ((a.final_state.matrix() - b.final_state.matrix()).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Execute, EveryStepPhysicalUnderFullNoise) {
    ExecutionOptions opts;
    opts.audit = AuditLevel::Full;
    for (auto v : {Variant::Emo, Variant::SpinMotion}) {
        EXPECT_NO_THROW(execute(build_plan(v), NoiseModel{}, 3, opts)) << to_string(v);
    }
}

TEST(Parity, NoiselessRoundTripIsMinusSinTwoPhi) {
    const auto phases = phase_grid(16);
    const auto run = run_parity_experiment(build_plan(Variant::Emo), gradient_only(), {}, phases, 0, 1,
                                           SamplingMode::Analytic);
    for (const auto &pt : run.points) EXPECT_NEAR(pt.parity, -std::sin(2 * pt.phi_p), 1e-9);
    EXPECT_NEAR(run.fit.C2, 1.0, 1e-9);
    EXPECT_NEAR(run.fit.C1, 0.0, 1e-9);
    EXPECT_NEAR(run.fit.C0, 0.0, 1e-9);
}

TEST(Parity, CompensationCancelsAnyGradient) {
    const auto phases = phase_grid(8);
    const auto ref = run_parity_experiment(build_plan(Variant::Emo), gradient_only(0.0), {}, phases, 0, 1,
                                           SamplingMode::Analytic);
    for (double hz : {250.0, 1000.0, 2700.0, 5000.0}) {
        const auto run = run_parity_experiment(build_plan(Variant::Emo), gradient_only(hz), {}, phases, 0, 1,
                                               SamplingMode::Analytic);
        EXPECT_NEAR(run.fit.C2, ref.fit.C2, 1e-6) << hz;
        EXPECT_NEAR(std::remainder(run.fit.phi2 - ref.fit.phi2, 2 * kPi), 0.0, 1e-6) << hz;
    }
}

TEST(Parity, SampleFromSweepMatchesEnsembleRun) {
    NoiseModel noise = NoiseModel::thermal_only();
    const auto plan = build_plan(Variant::Emo, noise);
    const auto phases = phase_grid(6);
    const auto run = run_parity_experiment(plan, noise, {}, phases, 200, 9, SamplingMode::Ensemble);
    const auto again = sample_parity(ensemble_sweep(plan, noise, phases), {}, 200, 9);
    ASSERT_EQ(run.points.size(), again.points.size());
    for (std::size_t k = 0; k < phases.size(); k++) {
        EXPECT_EQ(run.points[k].parity, again.points[k].parity);
    }
    EXPECT_EQ(run.fit.C2, again.fit.C2);
    EXPECT_THROW(sample_parity(ensemble_sweep(plan, noise, phases), {}, 0, 9), ConfigError);
}

TEST(Parity, ShelvingLeavesNoDownPopulation) {
    const auto sweep = ensemble_sweep(build_plan(Variant::Emo), gradient_only(), phase_grid(4));
    for (const auto &s : sweep.final_states) {
        EXPECT_NEAR(partial_trace(s, {kIonA}).populations()(level::kDown), 0.0, 1e-12);
        EXPECT_NEAR(partial_trace(s, {kIonB}).populations()(level::kDown), 0.0, 1e-12);
        const auto [ea, eb] = residual_shelved_population(s);
        EXPECT_NEAR(ea, 0.0, 1e-12);
        EXPECT_NEAR(eb, 0.0, 1e-12);
    }
}

TEST(Residual, ImperfectTransferRemnant) {
    const Register reg = protocol_register();
    auto s = basis_state(reg, {{kIonA, level::kDown}, {kIonB, level::kUp}, {kModeA, 0}, {kModeB, 0}});
    s = apply_sideband(s, kIonA, kModeA, 0.9 * kPi, 0.0);
    Rotation shelve;
    shelve.kind = RotationKind::Shelving;
    shelve.ions = {kIonA, kIonB};
    shelve.theta = kPi;
    shelve.levels = {level::kF2m0, level::kDown};
    apply_rotation(s, shelve);
    const auto [ea, eb] = residual_shelved_population(s);
    EXPECT_NEAR(ea, std::pow(std::cos(0.45 * kPi), 2), 1e-12);
    EXPECT_NEAR(ea, 0.0245, 1e-4);
    EXPECT_NEAR(eb, 0.0, 1e-15);
}

TEST(Control, NoiselessPopulations) {
    const auto c4 = run_control(Variant::ControlAfterState4, gradient_only(), 0, 1);
    EXPECT_NEAR(c4.p_up_up, 0.5, 1e-9);
    EXPECT_NEAR(c4.p_down_down, 0.0, 1e-9);
    EXPECT_NEAR(c4.p_mixed, 0.5, 1e-9);
    const auto c5 = run_control(Variant::ControlAfterState5, gradient_only(), 0, 1);
    EXPECT_NEAR(c5.p_up_up, 1.0, 1e-9);
    EXPECT_THROW(run_control(Variant::Emo, gradient_only(), 0, 1), ConfigError);
}

TEST(Checkpoints, IdealStatesAreNormalized) {
    for (int id = 1; id <= 5; id++) {
        EXPECT_NEAR(ideal_checkpoint_state(id, 0.4).amplitudes.norm(), 1.0, 1e-15);
    }
    EXPECT_THROW(ideal_checkpoint_state(6, 0.0), ConfigError);
}

TEST(PhaseGrid, EvenlySpaced) {
    const auto g = phase_grid(16);
    ASSERT_EQ(g.size(), 16u);
    EXPECT_DOUBLE_EQ(g[0], 0.0);
    EXPECT_NEAR(g[1], 2 * kPi / 16, 1e-15);
    EXPECT_LT(g.back(), 2 * kPi);
}

}  // namespace
}  // namespace emo
