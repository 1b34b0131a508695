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

#include "emo/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "emo/errors.hpp"

namespace emo {

namespace {

using std::numbers::pi;
const cd kI(0.0, 1.0);

Eigen::Index eidx(std::size_t i) {
    return static_cast<Eigen::Index>(i);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    std::uint64_t z = seed ^ (0x9e3779b97f4a7c15ULL * (a + 1)) ^ (0xc2b2ae3d27d4eb4fULL * (b + 1));
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// ---- plan construction ------------------------------------------------------

SequenceStep wait(double us, Well well, std::string label = "--") {
    SequenceStep s;
    s.op = Operation::DephaseDwell;
    s.label = std::move(label);
    s.duration_us = us;
    s.well = well;
    return s;
}

SequenceStep event(Operation op, std::string label, double us, Well well, int checkpoint = 0) {
    SequenceStep s = wait(us, well, std::move(label));
    s.op = op;
    s.checkpoint = checkpoint;
    return s;
}

SequenceStep cool(std::string label, double us, Well well, std::vector<std::string> modes, int checkpoint = 0) {
    SequenceStep s = event(Operation::Cool, std::move(label), us, well, checkpoint);
    s.modes = std::move(modes);
    return s;
}

SequenceStep carrier(std::string label, std::vector<std::string> ions, double theta, double phi, double us, Well well,
                     PhaseRef ref = PhaseRef::Fixed) {
    SequenceStep s = event(Operation::Rotation, std::move(label), us, well);
    s.rotation.kind = RotationKind::Carrier;
    s.rotation.ions = std::move(ions);
    s.rotation.theta = theta;
    s.rotation.phi = phi;
    s.rotation.duration_us = us;
    s.phase_ref = ref;
    return s;
}

SequenceStep sideband(std::string label, const std::string &ion, const std::string &mode, double phi, double us,
                      Well well, PhaseRef ref = PhaseRef::Fixed, int checkpoint = 0) {
    SequenceStep s = event(Operation::Rotation, std::move(label), us, well, checkpoint);
    s.rotation.kind = RotationKind::Sideband;
    s.rotation.ions = {ion};
    s.rotation.mode = mode;
    s.rotation.theta = pi;
    s.rotation.phi = phi;
    s.rotation.duration_us = us;
    s.phase_ref = ref;
    return s;
}

SequenceStep shelve(std::string label, std::vector<std::string> ions, LevelPair pair, double us, Well well) {
    SequenceStep s = event(Operation::Shelve, std::move(label), us, well);
    s.rotation.kind = RotationKind::Shelving;
    s.rotation.ions = std::move(ions);
    s.rotation.theta = pi;
    s.rotation.phi = 0.0;
    s.rotation.levels = pair;
    s.rotation.duration_us = us;
    return s;
}

const LevelPair kDownTo20{level::kDown, level::kF2m0};
const LevelPair k20To2m1{level::kF2m0, level::kF2mMinus1};
const LevelPair k2m1To2m2{level::kF2mMinus1, level::kF2mMinus2};

// Up to and including state (3).
std::vector<SequenceStep> preparation_steps() {
    const std::vector<std::string> both_modes{kModeA, kModeB};
    return {
        event(Operation::DephaseDwell, "order ions", 935, Well::Single),
        wait(406, Well::Single),
        cool("Doppler cool Be and Mg", 3500, Well::Single, {}),
        cool("Doppler cool Be", 500, Well::Single, {}),
        wait(2, Well::Single),
        event(Operation::DephaseDwell, "repump Mg", 2, Well::Single),
        event(Operation::DephaseDwell, "repump Be", 25, Well::Single),
        cool("Be sideband cool", 2753, Well::Single, {}),
        event(Operation::Prepare, "prepare Psi+", 266, Well::Single, 1),
        event(Operation::Separate, "move and separate", 819, Well::Both, 2),
        cool("Mg Doppler cool", 400, Well::Both, both_modes),
        cool("Mg second-sideband cool", 1078, Well::Both, both_modes),
        cool("Mg first-sideband cool", 1277, Well::Both, both_modes, 3),
        wait(22, Well::Both),
        sideband("spin->motion A", kIonA, kModeA, 0.0, 12, Well::A, PhaseRef::Fixed, 4),
    };
}

// Shelving of the residual populations and the final down -> dark transfer.
std::vector<SequenceStep> readout_steps(double lead_wait_us, bool include_analysis) {
    const std::vector<std::string> both{kIonA, kIonB};
    const Well w = Well::Single;
    std::vector<SequenceStep> s;
    // Residual populations parked in |2,0> move on to |2,-2> first.
    s.push_back(wait(lead_wait_us, w));
    s.push_back(shelve("|2,0> -> |2,-1>", both, k20To2m1, 3, w));
    s.push_back(wait(22, w));
    s.push_back(shelve("|2,-1> -> |2,-2>", both, k2m1To2m2, 4, w));
    s.push_back(wait(22, w));
    if (include_analysis) {
        s.push_back(carrier("rotate to measurement basis", both, pi / 2.0, -3.0 * pi / 4.0, 1, w));
        s.push_back(wait(6, w));
        s.push_back(carrier("analysis pulse", both, pi / 2.0, 0.0, 1, w, PhaseRef::Analysis));
        s.push_back(wait(79, w));
    }
    s.push_back(shelve("down -> |2,0>", both, kDownTo20, 3, w));
    s.push_back(wait(22, w));
    s.push_back(shelve("|2,0> -> |2,-1>", both, k20To2m1, 3, w));
    s.push_back(wait(22, w));
    s.push_back(shelve("|2,-1> <-> |2,-2>", both, k2m1To2m2, 4, w));
    s.push_back(wait(43, w));
    s.push_back(event(Operation::Measure, "detect", 200, w));
    return s;
}

void append(std::vector<SequenceStep> &a, const std::vector<SequenceStep> &b) {
    a.insert(a.end(), b.begin(), b.end());
}

}  // namespace

// ---- names -------------------------------------------------------------------

std::string to_string(Operation op) {
    switch (op) {
        case Operation::Rotation: return "rotation";
        case Operation::Prepare: return "prepare";
        case Operation::Separate: return "separate";
        case Operation::Recombine: return "recombine";
        case Operation::Cool: return "cool";
        case Operation::DephaseDwell: return "dephase_dwell";
        case Operation::Shelve: return "shelve";
        case Operation::Measure: return "measure";
    }
    return "?";
}

std::string to_string(Well w) {
    switch (w) {
        case Well::A: return "A";
        case Well::B: return "B";
        case Well::Single: return "single";
        case Well::Both: return "both";
    }
    return "?";
}

std::string to_string(PhaseRef r) {
    switch (r) {
        case PhaseRef::Fixed: return "fixed";
        case PhaseRef::Compensation: return "compensation";
        case PhaseRef::Analysis: return "analysis";
    }
    return "?";
}

std::string to_string(Variant v) {
    switch (v) {
        case Variant::Emo: return "emo";
        case Variant::SpinMotion: return "spin_motion";
        case Variant::ControlAfterState4: return "control_after_state4";
        case Variant::ControlAfterState5: return "control_after_state5";
    }
    return "?";
}

Operation operation_from_string(const std::string &s) {
    for (auto op : {Operation::Rotation, Operation::Prepare, Operation::Separate, Operation::Recombine,
                    Operation::Cool, Operation::DephaseDwell, Operation::Shelve, Operation::Measure}) {
        if (to_string(op) == s) {
            return op;
        }
    }
    throw ConfigError("unknown operation '" + s + "'");
}

Well well_from_string(const std::string &s) {
    for (auto w : {Well::A, Well::B, Well::Single, Well::Both}) {
        if (to_string(w) == s) {
            return w;
        }
    }
    throw ConfigError("unknown well '" + s + "'");
}

PhaseRef phase_ref_from_string(const std::string &s) {
    for (auto r : {PhaseRef::Fixed, PhaseRef::Compensation, PhaseRef::Analysis}) {
        if (to_string(r) == s) {
            return r;
        }
    }
    throw ConfigError("unknown phase reference '" + s + "'");
}

Variant variant_from_string(const std::string &s) {
    std::string t = s;
    std::replace(t.begin(), t.end(), '-', '_');
    for (auto v : {Variant::Emo, Variant::SpinMotion, Variant::ControlAfterState4, Variant::ControlAfterState5}) {
        if (to_string(v) == t) {
            return v;
        }
    }
    if (t == "control4") {
        return Variant::ControlAfterState4;
    }
    if (t == "control5") {
        return Variant::ControlAfterState5;
    }
    throw ConfigError("unknown variant '" + s + "'");
}

// ---- plans -------------------------------------------------------------------

double ExperimentPlan::total_duration_us() const {
    double t = 0.0;
    for (const auto &s : steps) {
        t += s.duration_us;
    }
    return t;
}

std::optional<std::size_t> ExperimentPlan::analysis_step() const {
    for (std::size_t i = 0; i < steps.size(); i++) {
        if (steps[i].phase_ref == PhaseRef::Analysis) {
            return i;
        }
    }
    return std::nullopt;
}

void ExperimentPlan::validate() const {
    if (steps.empty()) {
        throw ConfigError("plan has no steps");
    }
    std::size_t prepares = 0, analyses = 0, recombines = 0, sidebands_a = 0, sidebands_b = 0, separations = 0;
    for (std::size_t i = 0; i < steps.size(); i++) {
        const auto &s = steps[i];
        const std::string where = "step " + std::to_string(i) + " (" + s.label + "): ";
        if (!(s.duration_us >= 0.0) || !std::isfinite(s.duration_us)) {
            throw ConfigError(where + "duration must be non-negative");
        }
        if (s.op == Operation::Rotation || s.op == Operation::Shelve) {
            try {
                s.rotation.validate();
            } catch (const ConfigError &e) {
                throw ConfigError(where + e.what());
            }
            if (s.op == Operation::Shelve && s.rotation.kind != RotationKind::Shelving) {
                throw ConfigError(where + "shelve steps must use a shelving rotation");
            }
            for (const auto &ion : s.rotation.ions) {
                if (ion != kIonA && ion != kIonB) {
                    throw ConfigError(where + "unknown ion '" + ion + "'");
                }
            }
            if (s.rotation.kind == RotationKind::Sideband) {
                if (s.rotation.mode != kModeA && s.rotation.mode != kModeB) {
                    throw ConfigError(where + "unknown mode '" + s.rotation.mode + "'");
                }
                (s.rotation.mode == kModeA ? sidebands_a : sidebands_b)++;
            }
        } else if (s.phase_ref != PhaseRef::Fixed) {
            throw ConfigError(where + "only rotations take a run-time phase");
        }
        if (s.checkpoint < 0 || s.checkpoint > 5) {
            throw ConfigError(where + "checkpoint id must be 1..5");
        }
        prepares += s.op == Operation::Prepare;
        analyses += s.phase_ref == PhaseRef::Analysis;
        recombines += s.op == Operation::Recombine;
        separations += s.op == Operation::Separate;
    }
    if (prepares != 1 || separations != 1) {
        throw ConfigError("plan must prepare and separate exactly once");
    }
    if (analyses > 1 || recombines > 1) {
        throw ConfigError("plan has more than one analysis pulse or recombination");
    }
    switch (variant) {
        case Variant::Emo:
            if (sidebands_a != 2 || sidebands_b != 2 || analyses != 1 || recombines != 1) {
                throw ConfigError("emo plan needs two transfers per well, a recombination and an analysis pulse");
            }
            break;
        case Variant::SpinMotion:
            if (sidebands_a != 2 || sidebands_b != 0 || analyses != 1 || recombines != 1) {
                throw ConfigError("spin_motion plan transfers only in well A and must recombine and analyse");
            }
            break;
        case Variant::ControlAfterState4:
        case Variant::ControlAfterState5:
            if (analyses != 0 || recombines != 0) {
                throw ConfigError("control plans measure populations directly (no analysis, no recombination)");
            }
            break;
    }
}

ExperimentPlan build_plan(Variant variant, const NoiseModel & /*noise*/, const PlanOverrides &overrides) {
    ExperimentPlan plan;
    plan.variant = variant;
    auto &s = plan.steps;
    s = preparation_steps();

    const std::vector<SequenceStep> echo_first_half{
        wait(14, Well::A, "hold (spin-motion entangled)"),
        shelve("shelve residual down_A", {kIonA}, kDownTo20, 3, Well::A),
        wait(22, Well::A),
        carrier("echo B", {kIonB}, pi, 0.0, 4, Well::B),
    };
    const std::vector<SequenceStep> well_b_transfers{
        wait(38, Well::B),
        sideband("spin->motion B", kIonB, kModeB, 0.0, 14, Well::B, PhaseRef::Fixed, 5),
        wait(24, Well::B, "hold (motion-motion entangled)"),
        shelve("shelve residual down_B", {kIonB}, kDownTo20, 4, Well::B),
        wait(24, Well::B),
        sideband("motion->spin B", kIonB, kModeB, 0.0, 14, Well::B),
        wait(38, Well::B),
    };
    const std::vector<SequenceStep> back_to_a{
        carrier("echo B", {kIonB}, pi, 0.0, 4, Well::B),
        wait(39, Well::A),
        sideband("motion->spin A", kIonA, kModeA, 0.0, 11, Well::A, PhaseRef::Compensation),
        event(Operation::Recombine, "recombine", 1219, Well::Both),
        cool("Mg Doppler cool", 400, Well::Single, {}),
    };

    switch (variant) {
        case Variant::Emo:
            append(s, echo_first_half);
            append(s, well_b_transfers);
            append(s, back_to_a);
            append(s, readout_steps(22, true));
            break;
        case Variant::SpinMotion:
            append(s, echo_first_half);
            s.push_back(wait(90, Well::B, "hold (spin-motion entangled)"));
            append(s, back_to_a);
            append(s, readout_steps(22, true));
            break;
        case Variant::ControlAfterState4:
            s.push_back(wait(14, Well::A));
            s.push_back(shelve("shelve residual down_A", {kIonA}, kDownTo20, 3, Well::A));
            append(s, readout_steps(22, false));
            break;
        case Variant::ControlAfterState5:
            append(s, echo_first_half);
            s.push_back(wait(38, Well::B));
            s.push_back(sideband("spin->motion B", kIonB, kModeB, 0.0, 14, Well::B, PhaseRef::Fixed, 5));
            s.push_back(wait(24, Well::B));
            s.push_back(shelve("shelve residual down_B", {kIonB}, kDownTo20, 4, Well::B));
            append(s, readout_steps(24, false));
            break;
    }
    if (overrides.phi_p) {
        plan.analysis_phase = *overrides.phi_p;
    }
    plan.compensation_phase = overrides.phi_a;
    plan.validate();
    return plan;
}

// ---- executor ------------------------------------------------------------------

Register protocol_register(std::size_t cutoff) {
    return Register({SubsystemSpec::qudit(kIonA, level::kCount), SubsystemSpec::qudit(kIonB, level::kCount),
                     SubsystemSpec::mode(kModeA, cutoff), SubsystemSpec::mode(kModeB, cutoff)});
}

PureState ideal_checkpoint_state(int id, double xi, std::size_t cutoff) {
    const Register full = protocol_register(cutoff);
    const double r = 1.0 / std::sqrt(2.0);
    const cd e = std::exp(kI * xi);
    auto ket = [](const Register &reg, const LevelAssignment &a) { return basis_ket(reg, a).amplitudes; };
    using namespace level;
    switch (id) {
        case 1:
        case 2: {
            Register spins = full.restricted_to({kIonA, kIonB});
            CVector v = r * ket(spins, {{kIonA, kUp}, {kIonB, kDown}}) + r * e * ket(spins, {{kIonA, kDown}, {kIonB, kUp}});
            return PureState{spins, v};
        }
        case 3: {
            CVector v = r * ket(full, {{kIonA, kUp}, {kIonB, kDown}, {kModeA, 0}, {kModeB, 0}}) +
                        r * e * ket(full, {{kIonA, kDown}, {kIonB, kUp}, {kModeA, 0}, {kModeB, 0}});
            return PureState{full, v};
        }
        case 4: {
            Register reg = full.restricted_to({kIonA, kIonB, kModeA});
            CVector v = r * ket(reg, {{kIonA, kUp}, {kIonB, kDown}, {kModeA, 0}}) -
                        r * kI * e * ket(reg, {{kIonA, kUp}, {kIonB, kUp}, {kModeA, 1}});
            return PureState{reg, v};
        }
        case 5: {
            CVector v = r * ket(full, {{kIonA, kUp}, {kIonB, kUp}, {kModeA, 0}, {kModeB, 0}}) -
                        r * e * ket(full, {{kIonA, kUp}, {kIonB, kUp}, {kModeA, 1}, {kModeB, 1}});
            return PureState{full, v};
        }
        default: throw ConfigError("checkpoint id must be 1..5");
    }
}

namespace {

class Executor {
   public:
    Executor(const ExperimentPlan &plan, const NoiseModel &noise, const ShotJitter &jitter,
             const ExecutionOptions &options, double phi_a)
        : plan_(plan), noise_(noise), jitter_(jitter), options_(options), phi_a_(phi_a), phi_p_(plan.analysis_phase) {
        for (const auto &k : spin_depolarizing_kraus(noise.scatter_error_per_transfer, level::kCount)) {
            scatter_.push_back(kernels::SparseOperator::from_dense(k));
        }
        timeline_.mode_dwell_us[kModeA] = 0.0;
        timeline_.mode_dwell_us[kModeB] = 0.0;
    }

    void set_analysis_phase(double phi) {
        phi_p_ = phi;
    }

    static QuantumState initial_state() {
        return basis_state(protocol_register(),
                           {{kIonA, level::kUp}, {kIonB, level::kUp}, {kModeA, 0}, {kModeB, 0}});
    }

    void run(QuantumState &state, std::size_t first, std::size_t last) {
        for (std::size_t i = first; i < last; i++) {
            step(state, i);
        }
    }

    const Timeline &timeline() const {
        return timeline_;
    }
    std::vector<Checkpoint> &checkpoints() {
        return checkpoints_;
    }

   private:
    void step(QuantumState &state, std::size_t index) {
        const SequenceStep &s = plan_.steps[index];
        timeline_.step_start_us.push_back(timeline_.elapsed_us);
        std::string toggled;
        bool end_separation = false;

        switch (s.op) {
            case Operation::Rotation:
            case Operation::Shelve: {
                Rotation rot = s.rotation;
                if (s.phase_ref == PhaseRef::Compensation) {
                    rot.phi += phi_a_;
                } else if (s.phase_ref == PhaseRef::Analysis) {
                    rot.phi += phi_p_;
                }
                if (rot.kind == RotationKind::Sideband && !state.reg().contains(rot.mode)) {
                    throw ConfigError("step " + std::to_string(index) + ": mode '" + rot.mode +
                                      "' is no longer tracked");
                }
                apply_rotation(state, rot, jitter_.angle_factor);
                if (rot.kind == RotationKind::Sideband) {
                    toggled = rot.mode;
                    bool &occ = occupied_[rot.mode];
                    occ = !occ;
                    if (occ && rot.ions.front() == kIonA && !timeline_.xi_at_transfer_a) {
                        timeline_.xi_at_transfer_a = timeline_.xi;
                    }
                    if (noise_.scatter_error_per_transfer > 0.0) {
                        apply_channel_inplace(state, scatter_, {rot.ions.front()});
                    }
                }
                break;
            }
            case Operation::Prepare:
                state = replace_subsystems(state, {kIonA, kIonB}, prepare_psi_plus(noise_, level::kCount, kIonA, kIonB));
                break;
            case Operation::Separate: {
                const auto cutoff = state.reg().at(kModeA).dimension - 1;
                QuantumState excited = tensor_product(thermal_mode_state(noise_.separation_nbar, cutoff, kModeA),
                                                      thermal_mode_state(noise_.separation_nbar, cutoff, kModeB));
                state = replace_subsystems(state, {kModeA, kModeB}, excited);
                separated_ = true;
                break;
            }
            case Operation::Cool:
                for (const auto &m : s.modes) {
                    if (!state.reg().contains(m)) {
                        continue;
                    }
                    const double nbar = m == kModeA ? noise_.cooled_nbar_a : noise_.cooled_nbar_b;
                    state = sympathetic_cooling_reset(state, m, nbar);
                }
                break;
            case Operation::Recombine:
                state = partial_trace(state, {kIonA, kIonB});
                occupied_.clear();
                end_separation = true;
                break;
            case Operation::DephaseDwell:
            case Operation::Measure:
                break;
        }

        evolve(state, s.duration_us, toggled);
        if (end_separation) {
            separated_ = false;
        }
        if (s.checkpoint > 0) {
            record_checkpoint(state, s.checkpoint, index);
        }
        audit(state, index);
    }

    void evolve(QuantumState &state, double dt, const std::string &skip_mode) {
        if (dt <= 0.0) {
            return;
        }
        const double grad = separated_ ? noise_.field_gradient_hz : 0.0;
        apply_precession(state, kIonA, jitter_.uniform_detuning_hz + grad, dt);
        apply_precession(state, kIonB, jitter_.uniform_detuning_hz, dt);
        if (separated_) {
            timeline_.xi += 2.0 * pi * noise_.field_gradient_hz * dt * 1e-6;
            timeline_.separated_us += dt;
        }
        for (const auto &[mode, occ] : occupied_) {
            if (!occ || mode == skip_mode) {
                continue;
            }
            double &t = timeline_.mode_dwell_us[mode];
            const double before = noise_.motional_coherence(t);
            const double after = noise_.motional_coherence(t + dt);
            scale_mode_coherences(state, mode, before > 0.0 ? after / before : 0.0);
            t += dt;
        }
        timeline_.elapsed_us += dt;
    }

    void record_checkpoint(const QuantumState &state, int id, std::size_t index) {
        const double xi = id >= 4 ? timeline_.xi_at_transfer_a.value_or(timeline_.xi) : timeline_.xi;
        const PureState ideal = ideal_checkpoint_state(id, xi, state.reg().at(kModeA).dimension - 1);
        Checkpoint cp;
        cp.id = id;
        cp.step_index = index;
        cp.xi = xi;
        if (ideal.reg == state.reg()) {
            cp.fidelity = fidelity(state, ideal);
        } else {
            std::vector<std::string> keep;
            for (const auto &sub : ideal.reg.subsystems()) {
                keep.push_back(sub.label);
            }
            cp.fidelity = fidelity(partial_trace(state, keep), ideal);
        }
        if (options_.keep_checkpoint_states) {
            cp.state = state;
        }
        checkpoints_.push_back(std::move(cp));
    }

    void audit(const QuantumState &state, std::size_t index) const {
        if (options_.audit == AuditLevel::None) {
            return;
        }
        if (auto bad = state.physicality_violation(1e-9, options_.audit == AuditLevel::Full)) {
            throw InvariantViolation(index, *bad);
        }
    }

    const ExperimentPlan &plan_;
    const NoiseModel &noise_;
    ShotJitter jitter_;
    ExecutionOptions options_;
    double phi_a_;
    double phi_p_;
    std::vector<kernels::SparseOperator> scatter_;
    std::map<std::string, bool> occupied_;
    bool separated_ = false;
    Timeline timeline_;
    std::vector<Checkpoint> checkpoints_;
};

double compensation_for(const ExperimentPlan &plan, const NoiseModel &noise) {
    return plan.compensation_phase ? *plan.compensation_phase : resolve_compensation(plan, noise);
}

void check_inputs(const ExperimentPlan &plan, const NoiseModel &noise) {
    plan.validate();
    noise.validate();
}

}  // namespace

double resolve_compensation(const ExperimentPlan &plan, const NoiseModel &noise) {
    std::optional<std::size_t> recombine;
    for (std::size_t i = 0; i < plan.steps.size(); i++) {
        if (plan.steps[i].op == Operation::Recombine) {
            recombine = i;
        }
    }
    if (!recombine) {
        return 0.0;
    }
    NoiseModel coherent = NoiseModel::ideal();
    coherent.field_gradient_hz = noise.field_gradient_hz;
    ExecutionOptions opts;
    opts.audit = AuditLevel::None;
    Executor ex(plan, coherent, ShotJitter{}, opts, 0.0);
    QuantumState state = Executor::initial_state();
    ex.run(state, 0, *recombine + 1);
    const auto &reg = state.reg();
    const cd c = state.matrix()(eidx(reg.basis_index({{kIonA, level::kDown}, {kIonB, level::kUp}})),
                                eidx(reg.basis_index({{kIonA, level::kUp}, {kIonB, level::kDown}})));
    if (std::abs(c) < 1e-12) {
        throw NumericalError("no spin coherence left to compensate after recombination");
    }
    return -std::arg(c);
}

ExecutionResult execute_with_jitter(const ExperimentPlan &plan, const NoiseModel &noise, const ShotJitter &jitter,
                                    const ExecutionOptions &options) {
    check_inputs(plan, noise);
    const double phi_a = compensation_for(plan, noise);
    Executor ex(plan, noise, jitter, options, phi_a);
    QuantumState state = Executor::initial_state();
    ex.run(state, 0, plan.steps.size());
    return ExecutionResult{std::move(state), ex.timeline(), std::move(ex.checkpoints()), phi_a};
}

ExecutionResult execute(const ExperimentPlan &plan, const NoiseModel &noise, std::uint64_t seed,
                        const ExecutionOptions &options) {
    return execute_with_jitter(plan, noise, sample_shot_jitter(noise, seed), options);
}

std::vector<double> phase_grid(std::size_t n) {
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; k++) {
        out[k] = 2.0 * pi * static_cast<double>(k) / static_cast<double>(n);
    }
    return out;
}

SweepResult ensemble_sweep(const ExperimentPlan &plan, const NoiseModel &noise, const std::vector<double> &phases,
                           const ExecutionOptions &options) {
    check_inputs(plan, noise);
    const auto split = plan.analysis_step();
    if (!split) {
        throw ConfigError("plan has no analysis pulse to sweep");
    }
    if (phases.empty()) {
        throw ConfigError("phase sweep needs at least one phase");
    }
    const double phi_a = compensation_for(plan, noise);
    const auto rule = jitter_quadrature(noise);
    const auto nodes = static_cast<long long>(rule.size());
    std::vector<std::vector<CMatrix>> per_node(rule.size());
    Register spins = protocol_register().restricted_to({kIonA, kIonB});

#pragma omp parallel for schedule(dynamic)
    for (long long n = 0; n < nodes; n++) {
        const auto &[jitter, weight] = rule[static_cast<std::size_t>(n)];
        Executor ex(plan, noise, jitter, options, phi_a);
        QuantumState prefix = Executor::initial_state();
        ex.run(prefix, 0, *split);
        auto &out = per_node[static_cast<std::size_t>(n)];
        for (double phi : phases) {
            Executor branch = ex;
            branch.set_analysis_phase(phi);
            QuantumState st = prefix;
            branch.run(st, *split, plan.steps.size());
            out.push_back(weight * partial_trace(st, {kIonA, kIonB}).matrix());
        }
    }

    SweepResult result;
    result.phases = phases;
    result.compensation_phase = phi_a;
    for (std::size_t p = 0; p < phases.size(); p++) {
        CMatrix acc = CMatrix::Zero(eidx(spins.total_dimension()), eidx(spins.total_dimension()));
        for (const auto &node : per_node) {
            acc += node[p];
        }
        result.final_states.emplace_back(spins, acc);
    }
    return result;
}

QuantumState ensemble_final_state(const ExperimentPlan &plan, const NoiseModel &noise,
                                  const ExecutionOptions &options) {
    check_inputs(plan, noise);
    const double phi_a = compensation_for(plan, noise);
    const auto rule = jitter_quadrature(noise);
    const auto nodes = static_cast<long long>(rule.size());
    std::vector<CMatrix> per_node(rule.size());
    Register spins = protocol_register().restricted_to({kIonA, kIonB});

#pragma omp parallel for schedule(dynamic)
    for (long long n = 0; n < nodes; n++) {
        const auto &[jitter, weight] = rule[static_cast<std::size_t>(n)];
        Executor ex(plan, noise, jitter, options, phi_a);
        QuantumState st = Executor::initial_state();
        ex.run(st, 0, plan.steps.size());
        per_node[static_cast<std::size_t>(n)] = weight * partial_trace(st, {kIonA, kIonB}).matrix();
    }
    CMatrix acc = CMatrix::Zero(eidx(spins.total_dimension()), eidx(spins.total_dimension()));
    for (const auto &m : per_node) {
        acc += m;
    }
    return QuantumState(spins, acc);
}

namespace {

PopulationEstimate estimate_from_classes(const JointClassProbabilities &p, const DetectionModel &detection,
                                         std::size_t shots, std::uint64_t seed) {
    if (detection.combined) {
        return ml_populations(simulate_counts(p, detection, shots, seed), detection);
    }
    return ml_populations(simulate_counts_per_ion(p, detection, shots, seed), detection);
}

// One detection record drawn from a single shot's state.
struct ShotRecord {
    std::uint32_t combined = 0;
    std::array<std::uint32_t, 2> per_ion{};
};

ShotRecord detect_once(const QuantumState &spins, const DetectionModel &detection, std::uint64_t seed) {
    const auto p = joint_class_probabilities(spins);
    if (detection.combined) {
        return ShotRecord{simulate_counts(p, detection, 1, seed).front(), {}};
    }
    return ShotRecord{0, simulate_counts_per_ion(p, detection, 1, seed).front()};
}

PopulationEstimate estimate_from_records(const std::vector<ShotRecord> &records, const DetectionModel &detection) {
    if (detection.combined) {
        std::vector<std::uint32_t> c;
        for (const auto &r : records) {
            c.push_back(r.combined);
        }
        return ml_populations(c, detection);
    }
    std::vector<std::array<std::uint32_t, 2>> c;
    for (const auto &r : records) {
        c.push_back(r.per_ion);
    }
    return ml_populations(c, detection);
}

}  // namespace

ParityRun run_parity_experiment(const ExperimentPlan &plan, const NoiseModel &noise, const DetectionModel &detection,
                                const std::vector<double> &phases, std::size_t shots, std::uint64_t seed,
                                SamplingMode mode) {
    detection.validate();
    ParityRun run;
    if (mode != SamplingMode::Analytic && shots == 0) {
        throw ConfigError("sampled parity runs need at least one shot per phase");
    }
    if (mode == SamplingMode::PerShot) {
        check_inputs(plan, noise);
        const auto split = plan.analysis_step();
        if (!split) {
            throw ConfigError("plan has no analysis pulse to sweep");
        }
        run.compensation_phase = compensation_for(plan, noise);
        ExecutionOptions opts;
        opts.audit = AuditLevel::None;
        std::vector<std::vector<ShotRecord>> records(phases.size(), std::vector<ShotRecord>(shots));
        const auto n = static_cast<long long>(shots);
#pragma omp parallel for schedule(dynamic)
        for (long long k = 0; k < n; k++) {
            const auto shot = static_cast<std::uint64_t>(k);
            const ShotJitter jitter = sample_shot_jitter(noise, mix_seed(seed, shot, 0xA5));
            Executor ex(plan, noise, jitter, opts, run.compensation_phase);
            QuantumState prefix = Executor::initial_state();
            ex.run(prefix, 0, *split);
            for (std::size_t p = 0; p < phases.size(); p++) {
                Executor branch = ex;
                branch.set_analysis_phase(phases[p]);
                QuantumState st = prefix;
                branch.run(st, *split, plan.steps.size());
                records[p][static_cast<std::size_t>(k)] =
                    detect_once(partial_trace(st, {kIonA, kIonB}), detection, mix_seed(seed, shot, p + 1));
            }
        }
        for (std::size_t p = 0; p < phases.size(); p++) {
            run.points.push_back(parity_point(phases[p], estimate_from_records(records[p], detection)));
        }
    } else {
        ExecutionOptions opts;
        SweepResult sweep = ensemble_sweep(plan, noise, phases, opts);
        if (mode == SamplingMode::Ensemble) {
            return sample_parity(sweep, detection, shots, seed);
        }
        run.compensation_phase = sweep.compensation_phase;
        for (std::size_t p = 0; p < phases.size(); p++) {
            const auto classes = joint_class_probabilities(sweep.final_states[p]);
            run.points.push_back(parity_point(phases[p], populations_from_classes(classes)));
        }
    }
    run.fit = fit_parity(run.points);
    return run;
}

ParityRun sample_parity(const SweepResult &sweep, const DetectionModel &detection, std::size_t shots,
                        std::uint64_t seed) {
    detection.validate();
    if (shots == 0) {
        throw ConfigError("sampled parity runs need at least one shot per phase");
    }
    ParityRun run;
    run.compensation_phase = sweep.compensation_phase;
    for (std::size_t p = 0; p < sweep.phases.size(); p++) {
        const auto classes = joint_class_probabilities(sweep.final_states[p]);
        run.points.push_back(
            parity_point(sweep.phases[p], estimate_from_classes(classes, detection, shots, mix_seed(seed, p))));
    }
    run.fit = fit_parity(run.points);
    return run;
}

PopulationEstimate run_control(Variant variant, const NoiseModel &noise, std::size_t shots, std::uint64_t seed,
                               const DetectionModel &detection, SamplingMode mode) {
    if (variant != Variant::ControlAfterState4 && variant != Variant::ControlAfterState5) {
        throw ConfigError("run_control needs a control variant");
    }
    detection.validate();
    const ExperimentPlan plan = build_plan(variant, noise);
    if (shots == 0 || mode == SamplingMode::Analytic) {
        return populations_from_classes(joint_class_probabilities(ensemble_final_state(plan, noise)));
    }
    if (mode == SamplingMode::Ensemble) {
        const auto classes = joint_class_probabilities(ensemble_final_state(plan, noise));
        return estimate_from_classes(classes, detection, shots, seed);
    }
    check_inputs(plan, noise);
    ExecutionOptions opts;
    opts.audit = AuditLevel::None;
    std::vector<ShotRecord> records(shots);
    const auto n = static_cast<long long>(shots);
#pragma omp parallel for schedule(dynamic)
    for (long long k = 0; k < n; k++) {
        const auto shot = static_cast<std::uint64_t>(k);
        const auto res = execute(plan, noise, mix_seed(seed, shot, 0xA5), opts);
        records[static_cast<std::size_t>(k)] =
            detect_once(partial_trace(res.final_state, {kIonA, kIonB}), detection, mix_seed(seed, shot, 1));
    }
    return estimate_from_records(records, detection);
}

std::pair<double, double> residual_shelved_population(const QuantumState &state, std::size_t shelf_level) {
    const QuantumState spins = partial_trace(state, {kIonA, kIonB});
    const auto &reg = spins.reg();
    const Eigen::VectorXd pops = spins.populations();
    double ea = 0.0, eb = 0.0;
    for (std::size_t i = 0; i < reg.total_dimension(); i++) {
        const auto d = reg.digits(i);
        if (d[reg.index_of(kIonA)] == shelf_level) {
            ea += pops(eidx(i));
        }
        if (d[reg.index_of(kIonB)] == shelf_level) {
            eb += pops(eidx(i));
        }
    }
    return {ea, eb};
}

}  // namespace emo
