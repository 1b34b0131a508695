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

#include "cli.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "emo/errors.hpp"
#include "emo/modes.hpp"

namespace emo::cli {

namespace {

using ojson = nlohmann::ordered_json;

std::string slurp(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void dump(const std::filesystem::path &path, const std::string &text) {
    std::ofstream f(path);
    if (!f) {
        throw ConfigError("cannot write '" + path.string() + "'");
    }
    f << text;
}

std::string fmt(double v, const char *spec = "%.6g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

std::uint64_t parse_seed(const std::string &s, const std::string &origin) {
    try {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(s, &used, 0);
        if (used != s.size() || s.front() == '-') {
            throw std::invalid_argument(s);
        }
        return v;
    } catch (const std::exception &) {
        throw ConfigError(origin + ": '" + s + "' is not a seed (non-negative integer)");
    }
}

SamplingMode sampling_from(const std::string &s) {
    if (s == "analytic") return SamplingMode::Analytic;
    if (s == "ensemble") return SamplingMode::Ensemble;
    if (s == "per_shot" || s == "per-shot") return SamplingMode::PerShot;
    throw ConfigError("unknown sampling mode '" + s + "'");
}

// key=value pairs become a noise JSON document so that validation and key
// checking stay in one place.
NoiseModel apply_noise_overrides(const NoiseModel &base, const std::vector<std::string> &assignments) {
    if (assignments.empty()) {
        return base;
    }
    ojson doc = ojson::object();
    for (const auto &a : assignments) {
        const auto eq = a.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw ConfigError("noise override '" + a + "' is not key=value");
        }
        const std::string key = a.substr(0, eq);
        const std::string value = a.substr(eq + 1);
        try {
            std::size_t used = 0;
            const double v = std::stod(value, &used);
            if (used != value.size()) {
                throw std::invalid_argument(value);
            }
            doc[key] = v;
        } catch (const std::exception &) {
            doc[key] = value;
        }
    }
    return noise_from_json(doc.dump(), base);
}

struct NoiseFlags {
    std::string preset = "default";
    std::string file;
    std::vector<std::string> set;
};

void add_noise_flags(CLI::App *cmd, NoiseFlags &f) {
    cmd->add_option("--noise", f.preset, "Noise preset: default, off or thermal")
        ->check(CLI::IsMember({"default", "off", "thermal"}));
    cmd->add_option("--noise-file", f.file, "JSON document of noise parameters");
    cmd->add_option("--set", f.set, "Noise override key=value (repeatable)");
}

// Preset (when given or no config noise), then file, then --set.
NoiseModel resolve_noise(const NoiseFlags &f, const NoiseModel &from_config, bool preset_given) {
    NoiseModel n = from_config;
    if (preset_given) {
        n = f.preset == "off" ? NoiseModel::ideal() : f.preset == "thermal" ? NoiseModel::thermal_only() : NoiseModel{};
    }
    if (!f.file.empty()) {
        n = noise_from_json(slurp(f.file), n);
    }
    n = apply_noise_overrides(n, f.set);
    n.validate();
    return n;
}

std::string checkpoints_json(const ExecutionResult &r, const ExperimentPlan &plan) {
    ojson j;
    j["variant"] = to_string(plan.variant);
    j["compensation_phase"] = r.compensation_phase;
    j["total_duration_us"] = r.timeline.elapsed_us;
    j["separated_us"] = r.timeline.separated_us;
    ojson dwell = ojson::object();
    for (const auto &[mode, t] : r.timeline.mode_dwell_us) {
        dwell[mode] = t;
    }
    j["mode_dwell_us"] = dwell;
    ojson cps = ojson::array();
    for (const auto &c : r.checkpoints) {
        ojson e;
        e["id"] = c.id;
        e["step"] = c.step_index;
        e["label"] = plan.steps[c.step_index].label;
        e["xi"] = c.xi;
        e["fidelity"] = c.fidelity;
        cps.push_back(e);
    }
    j["checkpoints"] = cps;
    return j.dump(2) + "\n";
}

// ---- run ------------------------------------------------------------------

int cmd_run(const RunConfig &cfg, std::ostream &out) {
    cfg.validate();
    const ExperimentPlan plan = cfg.plan_path ? plan_from_json(slurp(*cfg.plan_path)) : build_plan(cfg.variant);
    if (!plan.analysis_step()) {
        throw ConfigError("variant '" + to_string(plan.variant) + "' has no analysis pulse; use the control command");
    }
    const std::filesystem::path dir(cfg.out_dir);
    std::filesystem::create_directories(dir);

    const ExecutionResult single = execute(plan, cfg.noise, cfg.seed);
    const ParityRun run =
        run_parity_experiment(plan, cfg.noise, cfg.detection, phase_grid(cfg.phases), cfg.shots, cfg.seed, cfg.sampling);

    dump(dir / "parity.csv", parity_csv(run.points));
    dump(dir / "fit.json", fit_json(run.fit));
    dump(dir / "checkpoints.json", checkpoints_json(single, plan));

    const auto unc = run.fit.uncertainties();
    const auto w = entanglement_witness(run.fit);
    out << "variant " << to_string(plan.variant) << ", " << cfg.phases << " phases x " << cfg.shots << " shots\n";
    out << "C2 = " << fmt(run.fit.C2, "%.4f") << " +/- " << fmt(unc[0], "%.4f") << "  phi2 = " << fmt(run.fit.phi2, "%.4f")
        << "\n";
    out << "C1 = " << fmt(run.fit.C1, "%.4f") << "  C0 = " << fmt(run.fit.C0, "%.4f") << "\n";
    out << (w.entangled ? "entangled" : "not entangled") << " (margin " << fmt(w.margin, "%+.4f") << ")\n";
    out << "wrote " << (dir / "parity.csv").string() << ", " << (dir / "fit.json").string() << ", "
        << (dir / "checkpoints.json").string() << "\n";
    return kOk;
}

// ---- control --------------------------------------------------------------

int cmd_control(Variant variant, const NoiseModel &noise, const DetectionModel &det, std::size_t shots,
                std::uint64_t seed, SamplingMode mode, const std::string &out_path, std::ostream &out) {
    if (variant != Variant::ControlAfterState4 && variant != Variant::ControlAfterState5) {
        throw ConfigError("control needs control_after_state4 or control_after_state5");
    }
    if (mode == SamplingMode::Analytic) {
        shots = 0;
    }
    const PopulationEstimate p = run_control(variant, noise, shots, seed, det, mode);
    ojson j;
    j["variant"] = to_string(variant);
    const ojson pops = ojson::parse(populations_json(p));
    for (const auto &[k, v] : pops.items()) {
        j[k] = v;
    }
    const std::string text = j.dump(2) + "\n";
    if (out_path.empty() || out_path == "-") {
        out << text;
    } else {
        dump(out_path, text);
        out << "P_up_up " << fmt(p.p_up_up, "%.4f") << "  P_down_down " << fmt(p.p_down_down, "%.4f") << "  P_mixed "
            << fmt(p.p_mixed, "%.4f") << "  residual " << fmt(p.residual, "%.4f") << "\n";
    }
    return kOk;
}

// ---- modes ----------------------------------------------------------------

std::vector<std::string> split_list(const std::string &s) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) {
            parts.push_back(item);
        }
    }
    return parts;
}

std::size_t mode_index_for(const std::string &name, std::size_t n_ions) {
    if (name == "common" || name == "inphase" || name == "in-phase" || name == "com") {
        return 0;
    }
    if (name == "stretch") {
        if (n_ions != 2) {
            throw ConfigError("'stretch' is only defined for two-ion chains; give a mode index");
        }
        return 1;
    }
    try {
        std::size_t used = 0;
        const unsigned long k = std::stoul(name, &used);
        if (used == name.size() && k < n_ions) {
            return k;
        }
    } catch (const std::exception &) {
    }
    throw ConfigError("unknown mode '" + name + "' (use common, inphase, stretch or an index)");
}

IonChainConfig apply_calibration(IonChainConfig cfg, const std::string &spec) {
    if (spec.empty()) {
        return cfg;
    }
    const auto eq = spec.find('=');
    if (eq == std::string::npos) {
        throw ConfigError("--calibrate expects MODE=FREQ, e.g. common=2.3MHz");
    }
    const std::size_t k = mode_index_for(spec.substr(0, eq), cfg.ions.size());
    const double f_mhz = parse_quantity(spec.substr(eq + 1), Dimension::Frequency, 1e6) / 1e6;
    return calibrate_curvature(cfg, k, f_mhz);
}

ojson modes_to_json(const IonChainConfig &cfg, const ModeSolution &s) {
    ojson j;
    ojson ions = ojson::array();
    for (const auto &ion : cfg.ions) {
        ions.push_back(ion.species);
    }
    j["ions"] = ions;
    j["axial_frequency_mhz"] = cfg.axial_frequency_mhz;
    j["positions_um"] = ojson::array();
    for (double x : s.positions_m) {
        j["positions_um"].push_back(x * 1e6);
    }
    ojson modes = ojson::array();
    for (std::size_t k = 0; k < s.frequencies_mhz.size(); k++) {
        ojson m;
        m["frequency_mhz"] = s.frequencies_mhz[k];
        m["vector"] = s.mode_vectors[k];
        ojson sizes = ojson::array();
        for (double z : s.ground_state_sizes_m[k]) {
            sizes.push_back(z * 1e9);
        }
        m["ground_state_size_nm"] = sizes;
        modes.push_back(m);
    }
    j["modes"] = modes;
    return j;
}

void print_mode_table(const IonChainConfig &cfg, const ModeSolution &s, std::ostream &out) {
    out << "axial reference " << fmt(cfg.axial_frequency_mhz, "%.6f") << " MHz\n";
    out << "mode  freq/MHz   vector (";
    for (std::size_t i = 0; i < cfg.ions.size(); i++) {
        out << (i ? "," : "") << cfg.ions[i].species;
    }
    out << ")   ground-state size/nm\n";
    for (std::size_t k = 0; k < s.frequencies_mhz.size(); k++) {
        out << fmt(static_cast<double>(k), "%4.0f") << "  " << fmt(s.frequencies_mhz[k], "%8.4f") << "  ";
        for (double v : s.mode_vectors[k]) {
            out << fmt(v, " %7.4f");
        }
        out << "   ";
        for (double z : s.ground_state_sizes_m[k]) {
            out << fmt(z * 1e9, " %6.2f");
        }
        out << "\n";
    }
}

struct ModesArgs {
    std::string chain = "Be,Mg";
    std::string axial = "2MHz";
    std::string calibrate;
    bool double_well = false;
    std::string spacing = "0.24mm";
    std::string detuning = "25kHz";
    std::string json_path;
};

int cmd_modes(const ModesArgs &a, std::ostream &out) {
    const double axial_mhz = parse_quantity(a.axial, Dimension::Frequency, 1e6) / 1e6;
    ojson doc;
    if (!a.double_well) {
        IonChainConfig cfg = IonChainConfig::single_well(split_list(a.chain), axial_mhz);
        cfg = apply_calibration(cfg, a.calibrate);
        const ModeSolution s = axial_normal_modes(cfg);
        print_mode_table(cfg, s, out);
        doc = modes_to_json(cfg, s);
    } else {
        // Each well holds one Be-Mg pair; the confinement is fixed by
        // calibrating an isolated pair, by default to a 2.3 MHz common mode.
        const std::string cal = a.calibrate.empty() ? "common=2.3MHz" : a.calibrate;
        const IonChainConfig pair = apply_calibration(IonChainConfig::single_well({"Be", "Mg"}, axial_mhz), cal);
        const double spacing_mm = parse_quantity(a.spacing, Dimension::Length, 1e-3) * 1e3;
        const double detuning_hz = parse_quantity(a.detuning, Dimension::Frequency, 1.0);
        const IonChainConfig cfg = IonChainConfig::double_well(spacing_mm, pair.axial_frequency_mhz);
        const ExchangeResult ex = interwell_exchange(cfg);
        print_mode_table(cfg, ex.modes, out);
        const double bound = exchange_population_bound(ex.exchange_rate_hz, detuning_hz);
        out << "well spacing " << fmt(spacing_mm, "%.4g") << " mm\n";
        out << "resonant exchange rate " << fmt(ex.exchange_rate_hz, "%.4g") << " Hz\n";
        out << "isolated stretch detuning " << fmt(ex.detuning_hz, "%.4g") << " Hz\n";
        out << "transfer bound at " << fmt(detuning_hz, "%.4g") << " Hz detuning " << fmt(bound, "%.3e") << "\n";
        doc = modes_to_json(cfg, ex.modes);
        doc["spacing_mm"] = spacing_mm;
        doc["exchange_rate_hz"] = ex.exchange_rate_hz;
        doc["splitting_hz"] = ex.splitting_hz;
        doc["isolated_detuning_hz"] = ex.detuning_hz;
        doc["bound_detuning_hz"] = detuning_hz;
        doc["transfer_bound"] = bound;
    }
    if (a.json_path == "-") {
        out << doc.dump(2) << "\n";
    } else if (!a.json_path.empty()) {
        dump(a.json_path, doc.dump(2) + "\n");
    }
    return kOk;
}

// ---- fit ------------------------------------------------------------------

int cmd_fit(const std::string &csv_path, const std::string &out_path, std::ostream &out) {
    const FitResult fit = fit_parity(read_parity_csv(csv_path));
    const std::string text = fit_json(fit);
    if (out_path.empty() || out_path == "-") {
        out << text;
    } else {
        dump(out_path, text);
        out << "C2 = " << fmt(fit.C2, "%.4f") << " +/- " << fmt(fit.uncertainties()[0], "%.4f") << "\n";
    }
    return kOk;
}

}  // namespace

double parse_quantity(const std::string &text, Dimension dim, double bare_scale) {
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(text, &used);
    } catch (const std::exception &) {
        throw ConfigError("'" + text + "' is not a quantity");
    }
    std::string unit = text.substr(used);
    while (!unit.empty() && unit.front() == ' ') {
        unit.erase(unit.begin());
    }
    if (unit.empty()) {
        return value * bare_scale;
    }
    static const std::map<std::string, double> freq{{"Hz", 1.0}, {"kHz", 1e3}, {"MHz", 1e6}, {"GHz", 1e9}};
    static const std::map<std::string, double> length{{"m", 1.0}, {"mm", 1e-3}, {"um", 1e-6}, {"µm", 1e-6}, {"nm", 1e-9}};
    static const std::map<std::string, double> time{{"s", 1.0}, {"ms", 1e-3}, {"us", 1e-6}, {"µs", 1e-6}, {"ns", 1e-9}};
    const auto &table = dim == Dimension::Frequency ? freq : dim == Dimension::Length ? length : time;
    const auto it = table.find(unit);
    if (it == table.end()) {
        throw ConfigError("'" + text + "': unknown unit '" + unit + "'");
    }
    return value * it->second;
}

void RunConfig::validate() const {
    if (shots == 0 && sampling != SamplingMode::Analytic) {
        throw ConfigError("shots must be >= 1 unless --analytic is given");
    }
    if (phases < 5) {
        throw ConfigError("the parity fit needs at least 5 phase points");
    }
    noise.validate();
    detection.validate();
}

RunConfig run_config_from_json(const std::string &text, const RunConfig &base) {
    RunConfig cfg = base;
    try {
        const auto j = nlohmann::json::parse(text);
        if (!j.is_object()) {
            throw ConfigError("run config must be a JSON object");
        }
        for (auto it = j.begin(); it != j.end(); ++it) {
            const std::string &k = it.key();
            const auto &v = it.value();
            if (k == "variant") {
                cfg.variant = variant_from_string(v.get<std::string>());
            } else if (k == "shots") {
                cfg.shots = v.get<std::size_t>();
            } else if (k == "phases") {
                cfg.phases = v.get<std::size_t>();
            } else if (k == "seed") {
                cfg.seed = v.is_string() ? parse_seed(v.get<std::string>(), "config") : v.get<std::uint64_t>();
            } else if (k == "noise") {
                if (v.is_string()) {
                    const auto p = v.get<std::string>();
                    if (p == "off") cfg.noise = NoiseModel::ideal();
                    else if (p == "default") cfg.noise = NoiseModel{};
                    else if (p == "thermal") cfg.noise = NoiseModel::thermal_only();
                    else throw ConfigError("noise must be default, off, thermal or an object");
                } else {
                    cfg.noise = noise_from_json(v.dump(), cfg.noise);
                }
            } else if (k == "detection") {
                cfg.detection.bright_mean = v.value("bright_mean", cfg.detection.bright_mean);
                cfg.detection.dark_mean = v.value("dark_mean", cfg.detection.dark_mean);
                cfg.detection.intermediate_mean = v.value("intermediate_mean", cfg.detection.intermediate_mean);
                cfg.detection.window_us = v.value("window_us", cfg.detection.window_us);
                cfg.detection.combined = v.value("combined", cfg.detection.combined);
            } else if (k == "sampling") {
                cfg.sampling = sampling_from(v.get<std::string>());
            } else if (k == "out_dir") {
                cfg.out_dir = v.get<std::string>();
            } else if (k == "plan") {
                cfg.plan_path = v.get<std::string>();
            } else {
                throw ConfigError("unknown run config key '" + k + "'");
            }
        }
    } catch (const nlohmann::json::exception &e) {
        throw ConfigError(std::string("run config: ") + e.what());
    }
    return cfg;
}

std::uint64_t default_seed() {
    const char *env = std::getenv("EMO_SEED");
    if (env != nullptr && *env != '\0') {
        return parse_seed(env, "EMO_SEED");
    }
    return 1;
}

int main_entry(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
    CLI::App app{"Simulator for spin entanglement stored in separated motional modes"};
    app.require_subcommand(1);

    // run
    auto *run = app.add_subcommand("run", "Parity sweep of a protocol variant; writes parity.csv, fit.json, checkpoints.json");
    std::string run_config_path, run_variant = "emo", run_seed, run_plan, run_out;
    std::size_t run_shots = 500, run_phases = 16;
    bool run_analytic = false, run_per_shot = false;
    NoiseFlags run_noise;
    run->add_option("--config", run_config_path, "JSON run configuration");
    auto *o_variant = run->add_option("--variant", run_variant, "emo or spin-motion");
    auto *o_shots = run->add_option("--shots", run_shots, "Shots per phase point");
    auto *o_phases = run->add_option("--phases", run_phases, "Number of analysis phases on [0, 2pi)");
    auto *o_seed = run->add_option("--seed", run_seed, "RNG seed (default $EMO_SEED or 1)");
    auto *o_plan = run->add_option("--plan", run_plan, "Plan document to run instead of the built-in variant");
    auto *o_out = run->add_option("--out-dir", run_out, "Output directory");
    auto *o_analytic = run->add_flag("--analytic", run_analytic, "Parity from the density matrix, no sampling");
    auto *o_per_shot = run->add_flag("--per-shot", run_per_shot, "Execute every shot with its own jitter draw");
    o_analytic->excludes(o_per_shot);
    add_noise_flags(run, run_noise);

    // control
    auto *control = app.add_subcommand("control", "Populations after a control sequence");
    std::string ctl_variant, ctl_seed, ctl_out;
    std::size_t ctl_shots = 10000;
    bool ctl_exact = false, ctl_per_shot = false;
    NoiseFlags ctl_noise;
    control->add_option("--variant", ctl_variant, "control4 (after state 4) or control5 (after state 5)")->required();
    control->add_option("--shots", ctl_shots, "Detection shots");
    auto *c_seed = control->add_option("--seed", ctl_seed, "RNG seed (default $EMO_SEED or 1)");
    auto *c_exact = control->add_flag("--analytic,--exact", ctl_exact, "Exact populations, no sampling");
    control->add_flag("--per-shot", ctl_per_shot, "Execute every shot with its own jitter draw")->excludes(c_exact);
    control->add_option("--out", ctl_out, "Write the JSON report here instead of stdout");
    add_noise_flags(control, ctl_noise);

    // modes
    auto *modes = app.add_subcommand("modes", "Axial normal modes and inter-well exchange");
    ModesArgs margs;
    modes->add_option("--chain", margs.chain, "Comma-separated species, e.g. Be,Mg,Mg,Be");
    modes->add_option("--axial", margs.axial, "Single-Be axial frequency, e.g. 2MHz");
    modes->add_option("--calibrate", margs.calibrate, "MODE=FREQ: solve the confinement so MODE sits at FREQ");
    modes->add_flag("--double-well", margs.double_well, "Be-Mg | Mg-Be in two wells");
    modes->add_option("--spacing", margs.spacing, "Well spacing, e.g. 0.24mm");
    modes->add_option("--detuning", margs.detuning, "Detuning for the transfer bound, e.g. 25kHz");
    modes->add_option("--json", margs.json_path, "Also write the table as JSON ('-' for stdout)");

    // fit
    auto *fit = app.add_subcommand("fit", "Fit an existing parity CSV");
    std::string fit_csv, fit_out;
    fit->add_option("csv", fit_csv, "Parity CSV (phi_p,parity,std_error,shots)")->required();
    fit->add_option("--out", fit_out, "Write fit JSON here instead of stdout");

    std::vector<const char *> argv;
    argv.reserve(args.size());
    for (const auto &a : args) {
        argv.push_back(a.c_str());
    }
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp &) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp &) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError &e) {
        err << "error: " << e.what() << "\n";
        return kConfigError;
    }

    try {
        if (run->parsed()) {
            RunConfig cfg;
            cfg.seed = default_seed();
            if (!run_config_path.empty()) {
                cfg = run_config_from_json(slurp(run_config_path), cfg);
            }
            if (o_variant->count()) cfg.variant = variant_from_string(run_variant);
            if (o_shots->count()) cfg.shots = run_shots;
            if (o_phases->count()) cfg.phases = run_phases;
            if (o_seed->count()) cfg.seed = parse_seed(run_seed, "--seed");
            if (o_plan->count()) cfg.plan_path = run_plan;
            if (o_out->count()) cfg.out_dir = run_out;
            if (run_analytic) cfg.sampling = SamplingMode::Analytic;
            if (run_per_shot) cfg.sampling = SamplingMode::PerShot;
            const bool preset_given = run->count("--noise") > 0;
            cfg.noise = resolve_noise(run_noise, cfg.noise, preset_given);
            return cmd_run(cfg, out);
        }
        if (control->parsed()) {
            const std::uint64_t seed = c_seed->count() ? parse_seed(ctl_seed, "--seed") : default_seed();
            const NoiseModel noise = resolve_noise(ctl_noise, NoiseModel{}, true);
            const SamplingMode mode =
                ctl_exact ? SamplingMode::Analytic : ctl_per_shot ? SamplingMode::PerShot : SamplingMode::Ensemble;
            if (ctl_shots == 0 && mode != SamplingMode::Analytic) {
                throw ConfigError("shots must be >= 1 unless --exact is given");
            }
            return cmd_control(variant_from_string(ctl_variant), noise, DetectionModel{}, ctl_shots, seed, mode, ctl_out,
                               out);
        }
        if (modes->parsed()) {
            return cmd_modes(margs, out);
        }
        if (fit->parsed()) {
            return cmd_fit(fit_csv, fit_out, out);
        }
    } catch (const ConfigError &e) {
        err << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const FitError &e) {
        err << "fit failed: " << e.what() << "\n";
        return kNumericalError;
    } catch (const NumericalError &e) {
        err << "numerical failure: " << e.what() << "\n";
        return kNumericalError;
    } catch (const std::filesystem::filesystem_error &e) {
        err << "config error: " << e.what() << "\n";
        return kConfigError;
    }
    return kConfigError;
}

}  // namespace emo::cli
