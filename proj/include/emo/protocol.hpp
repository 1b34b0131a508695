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

// Declarative pulse sequences for the separated-oscillator entanglement
// experiment and an executor that evolves a density matrix through them.
//
// Register while the modes are tracked: [Be_A, Be_B, stretch_A, stretch_B].
// Recombination traces the stretch modes out, leaving [Be_A, Be_B].

#ifndef EMO_PROTOCOL_HPP
#define EMO_PROTOCOL_HPP

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "emo/dynamics.hpp"
#include "emo/measurement.hpp"
#include "emo/qstate.hpp"

namespace emo {

inline const std::string kIonA = "Be_A";
inline const std::string kIonB = "Be_B";
inline const std::string kModeA = "stretch_A";
inline const std::string kModeB = "stretch_B";

enum class Operation { Rotation, Prepare, Separate, Recombine, Cool, DephaseDwell, Shelve, Measure };
enum class Well { A, B, Single, Both };
/// What gets added to a rotation's fixed phase at run time.
enum class PhaseRef { Fixed, Compensation, Analysis };
enum class Variant { Emo, SpinMotion, ControlAfterState4, ControlAfterState5 };

std::string to_string(Operation op);
std::string to_string(Well w);
std::string to_string(PhaseRef r);
std::string to_string(Variant v);
Operation operation_from_string(const std::string &s);
Well well_from_string(const std::string &s);
PhaseRef phase_ref_from_string(const std::string &s);
/// Accepts "emo", "spin_motion"/"spin-motion", "control_after_state4", ...
Variant variant_from_string(const std::string &s);

struct SequenceStep {
    Operation op = Operation::DephaseDwell;
    std::string label;
    /// Free evolution after the operation itself.
    double duration_us = 0.0;
    Well well = Well::Single;
    /// Rotation and Shelve steps.
    Rotation rotation;
    PhaseRef phase_ref = PhaseRef::Fixed;
    /// Cool steps: the modes reset.
    std::vector<std::string> modes;
    /// 1..5 records the named intermediate state after this step; 0 none.
    int checkpoint = 0;
};

struct ExperimentPlan {
    Variant variant = Variant::Emo;
    std::vector<SequenceStep> steps;
    double analysis_phase = 0.0;
    /// Empty means "auto": cancel the accumulated inter-well phase.
    std::optional<double> compensation_phase;

    double total_duration_us() const;
    /// Index of the analysis pulse, if the plan has one.
    std::optional<std::size_t> analysis_step() const;
    /// Structural checks (variant-specific). Throws ConfigError.
    void validate() const;
};

struct PlanOverrides {
    std::optional<double> phi_p;
    std::optional<double> phi_a;
};

/// The full step list of a variant. `noise` is accepted for interface symmetry;
/// plans are noise-independent (noise enters at execution).
ExperimentPlan build_plan(Variant variant, const NoiseModel &noise = {}, const PlanOverrides &overrides = {});

/// Plan <-> JSON document.
std::string plan_to_json(const ExperimentPlan &plan);
ExperimentPlan plan_from_json(const std::string &text);
std::string noise_to_json(const NoiseModel &noise);
/// Fields absent from the document keep the values of `base`.
NoiseModel noise_from_json(const std::string &text, const NoiseModel &base = {});

struct Timeline {
    double elapsed_us = 0.0;
    /// Time spent with the ions in separate wells.
    double separated_us = 0.0;
    /// Relative phase of |down_A up_B> against |up_A down_B> from the field gradient.
    double xi = 0.0;
    /// xi when the well-A spin was mapped onto its mode.
    std::optional<double> xi_at_transfer_a;
    /// Time each mode spent holding a spin-derived superposition.
    std::map<std::string, double> mode_dwell_us;
    std::vector<double> step_start_us;
};

struct Checkpoint {
    int id = 0;
    std::size_t step_index = 0;
    double xi = 0.0;
    double fidelity = 0.0;
    std::optional<QuantumState> state;
};

enum class AuditLevel { None, Basic, Full };

struct ExecutionOptions {
    /// Basic checks trace, Hermiticity and the diagonal after every step; Full
    /// adds an eigenvalue check.
    AuditLevel audit = AuditLevel::Basic;
    bool keep_checkpoint_states = false;
};

struct ExecutionResult {
    QuantumState final_state;
    Timeline timeline;
    std::vector<Checkpoint> checkpoints;
    double compensation_phase = 0.0;
};

/// Register [Be_A, Be_B, stretch_A, stretch_B] with qudits of 5 levels.
Register protocol_register(std::size_t cutoff = 4);

/// Ideal states (1)..(5) with phase `xi`, on the register the executor uses for
/// that checkpoint's fidelity audit.
PureState ideal_checkpoint_state(int id, double xi, std::size_t cutoff = 4);

/// One shot: jitter sampled once from `seed`.
ExecutionResult execute(const ExperimentPlan &plan, const NoiseModel &noise, std::uint64_t seed,
                        const ExecutionOptions &options = {});
ExecutionResult execute_with_jitter(const ExperimentPlan &plan, const NoiseModel &noise, const ShotJitter &jitter,
                                    const ExecutionOptions &options = {});

/// phi_A cancelling the inter-well phase, found from a coherent pass with
/// phi_A = 0 and only the deterministic field gradient.
double resolve_compensation(const ExperimentPlan &plan, const NoiseModel &noise);

/// Jitter-averaged final states, one per analysis phase, from a Gauss-Hermite
/// rule over the per-shot classical draws. The shared prefix up to the analysis
/// pulse is computed once per quadrature node. Final states are reduced to the
/// two spins [Be_A, Be_B].
struct SweepResult {
    std::vector<double> phases;
    std::vector<QuantumState> final_states;
    double compensation_phase = 0.0;
};
SweepResult ensemble_sweep(const ExperimentPlan &plan, const NoiseModel &noise, const std::vector<double> &phases,
                           const ExecutionOptions &options = {});
/// Jitter-averaged final state of a plan without analysis-phase dependence.
QuantumState ensemble_final_state(const ExperimentPlan &plan, const NoiseModel &noise,
                                  const ExecutionOptions &options = {});

/// `n` evenly spaced phases on [0, 2 pi).
std::vector<double> phase_grid(std::size_t n);

enum class SamplingMode { Analytic, Ensemble, PerShot };

struct ParityRun {
    std::vector<ParityPoint> points;
    FitResult fit;
    double compensation_phase = 0.0;
};

/// Parity points over `phases`. Analytic: exact class probabilities, zero error
/// bars. Ensemble: counts sampled from the jitter-averaged state. PerShot: every
/// shot executes the plan with its own jitter draw.
ParityRun run_parity_experiment(const ExperimentPlan &plan, const NoiseModel &noise, const DetectionModel &detection,
                                const std::vector<double> &phases, std::size_t shots, std::uint64_t seed,
                                SamplingMode mode = SamplingMode::Ensemble);

/// Ensemble-mode parity points from an existing sweep. Shots are independent,
/// so drawing counts from the jitter-averaged state has the same distribution
/// as drawing each shot from its own jitter sample.
ParityRun sample_parity(const SweepResult &sweep, const DetectionModel &detection, std::size_t shots,
                        std::uint64_t seed);

/// Populations after a control sequence. shots = 0 returns exact populations.
PopulationEstimate run_control(Variant variant, const NoiseModel &noise, std::size_t shots, std::uint64_t seed,
                               const DetectionModel &detection = {}, SamplingMode mode = SamplingMode::Ensemble);

/// Population in `shelf_level` of each ion: (eps_A, eps_B).
std::pair<double, double> residual_shelved_population(const QuantumState &state,
                                                      std::size_t shelf_level = level::kF2m0);

}  // namespace emo

#endif
