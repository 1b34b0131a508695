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

// JSON documents for plans and noise models. Infinite times are written as
// the string "inf".

#include <cmath>
#include <limits>

#include "json.hpp"

#include "emo/errors.hpp"
#include "emo/protocol.hpp"

namespace emo {

namespace {

using json = nlohmann::ordered_json;

json number_or_inf(double v) {
    if (std::isinf(v) && v > 0) {
        return "inf";
    }
    return v;
}

double read_number(const json &j, const std::string &key) {
    const auto &v = j.at(key);
    if (v.is_string() && (v.get<std::string>() == "inf" || v.get<std::string>() == "infinity")) {
        return std::numeric_limits<double>::infinity();
    }
    if (!v.is_number()) {
        throw ConfigError("'" + key + "' must be a number");
    }
    return v.get<double>();
}

std::string kind_name(RotationKind k) {
    switch (k) {
        case RotationKind::Carrier: return "carrier";
        case RotationKind::Sideband: return "sideband";
        case RotationKind::Shelving: return "shelving";
    }
    return "?";
}

RotationKind kind_from(const std::string &s) {
    if (s == "carrier") return RotationKind::Carrier;
    if (s == "sideband") return RotationKind::Sideband;
    if (s == "shelving") return RotationKind::Shelving;
    throw ConfigError("unknown rotation kind '" + s + "'");
}

json step_to_json(const SequenceStep &s) {
    json j;
    j["op"] = to_string(s.op);
    j["label"] = s.label;
    j["duration_us"] = s.duration_us;
    j["well"] = to_string(s.well);
    if (s.op == Operation::Rotation || s.op == Operation::Shelve) {
        json r;
        r["kind"] = kind_name(s.rotation.kind);
        r["ions"] = s.rotation.ions;
        if (!s.rotation.mode.empty()) {
            r["mode"] = s.rotation.mode;
        }
        r["theta"] = s.rotation.theta;
        r["phi"] = s.rotation.phi;
        r["levels"] = {s.rotation.levels.first, s.rotation.levels.second};
        j["rotation"] = r;
        j["phase_ref"] = to_string(s.phase_ref);
    }
    if (!s.modes.empty()) {
        j["modes"] = s.modes;
    }
    if (s.checkpoint != 0) {
        j["checkpoint"] = s.checkpoint;
    }
    return j;
}

SequenceStep step_from_json(const json &j) {
    SequenceStep s;
    s.op = operation_from_string(j.at("op").get<std::string>());
    s.label = j.value("label", "");
    s.duration_us = read_number(j, "duration_us");
    s.well = well_from_string(j.value("well", "single"));
    if (j.contains("rotation")) {
        const auto &r = j.at("rotation");
        s.rotation.kind = kind_from(r.at("kind").get<std::string>());
        s.rotation.ions = r.at("ions").get<std::vector<std::string>>();
        s.rotation.mode = r.value("mode", "");
        s.rotation.theta = read_number(r, "theta");
        s.rotation.phi = read_number(r, "phi");
        if (r.contains("levels")) {
            const auto lv = r.at("levels").get<std::vector<std::size_t>>();
            if (lv.size() != 2) {
                throw ConfigError("rotation levels must be a pair");
            }
            s.rotation.levels = LevelPair{lv[0], lv[1]};
        }
        s.rotation.duration_us = s.duration_us > 0.0 ? s.duration_us : 1.0;
    }
    s.phase_ref = phase_ref_from_string(j.value("phase_ref", "fixed"));
    if (j.contains("modes")) {
        s.modes = j.at("modes").get<std::vector<std::string>>();
    }
    s.checkpoint = j.value("checkpoint", 0);
    return s;
}

template <typename F>
auto guarded(const std::string &what, F &&f) {
    try {
        return f();
    } catch (const nlohmann::json::exception &e) {
        throw ConfigError(what + ": " + e.what());
    }
}

}  // namespace

std::string plan_to_json(const ExperimentPlan &plan) {
    json j;
    j["variant"] = to_string(plan.variant);
    j["analysis_phase"] = plan.analysis_phase;
    j["compensation_phase"] = plan.compensation_phase ? json(*plan.compensation_phase) : json("auto");
    j["total_duration_us"] = plan.total_duration_us();
    json steps = json::array();
    for (const auto &s : plan.steps) {
        steps.push_back(step_to_json(s));
    }
    j["steps"] = steps;
    return j.dump(2) + "\n";
}

ExperimentPlan plan_from_json(const std::string &text) {
    return guarded("plan", [&] {
        const json j = json::parse(text);
        ExperimentPlan plan;
        plan.variant = variant_from_string(j.at("variant").get<std::string>());
        plan.analysis_phase = j.contains("analysis_phase") ? read_number(j, "analysis_phase") : 0.0;
        if (j.contains("compensation_phase")) {
            const auto &c = j.at("compensation_phase");
            if (c.is_string()) {
                if (c.get<std::string>() != "auto") {
                    throw ConfigError("compensation_phase must be a number or \"auto\"");
                }
            } else {
                plan.compensation_phase = c.get<double>();
            }
        }
        for (const auto &s : j.at("steps")) {
            plan.steps.push_back(step_from_json(s));
        }
        plan.validate();
        return plan;
    });
}

std::string noise_to_json(const NoiseModel &n) {
    json j;
    j["prep_fidelity"] = n.prep_fidelity;
    j["motional_coherence_time_us"] = number_or_inf(n.motional_coherence_time_us);
    j["motional_decay_shape"] = n.motional_decay_shape == DecayShape::Gaussian ? "gaussian" : "exponential";
    j["motional_tau_scale"] = n.motional_tau_scale;
    j["intensity_jitter_rms"] = n.intensity_jitter_rms;
    j["field_gradient_hz"] = n.field_gradient_hz;
    j["uniform_field_jitter_rms_hz"] = n.uniform_field_jitter_rms_hz;
    j["scatter_error_per_transfer"] = n.scatter_error_per_transfer;
    j["cooled_nbar_a"] = n.cooled_nbar_a;
    j["cooled_nbar_b"] = n.cooled_nbar_b;
    j["separation_nbar"] = n.separation_nbar;
    return j.dump(2) + "\n";
}

NoiseModel noise_from_json(const std::string &text, const NoiseModel &base) {
    return guarded("noise", [&] {
        const json j = json::parse(text);
        if (!j.is_object()) {
            throw ConfigError("noise document must be a JSON object");
        }
        NoiseModel n = base;
        const std::vector<std::pair<std::string, double *>> fields{
            {"prep_fidelity", &n.prep_fidelity},
            {"motional_coherence_time_us", &n.motional_coherence_time_us},
            {"motional_tau_scale", &n.motional_tau_scale},
            {"intensity_jitter_rms", &n.intensity_jitter_rms},
            {"field_gradient_hz", &n.field_gradient_hz},
            {"uniform_field_jitter_rms_hz", &n.uniform_field_jitter_rms_hz},
            {"scatter_error_per_transfer", &n.scatter_error_per_transfer},
            {"cooled_nbar_a", &n.cooled_nbar_a},
            {"cooled_nbar_b", &n.cooled_nbar_b},
            {"separation_nbar", &n.separation_nbar},
        };
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (it.key() == "motional_decay_shape") {
                const auto shape = it.value().get<std::string>();
                if (shape == "gaussian") {
                    n.motional_decay_shape = DecayShape::Gaussian;
                } else if (shape == "exponential") {
                    n.motional_decay_shape = DecayShape::Exponential;
                } else {
                    throw ConfigError("motional_decay_shape must be gaussian or exponential");
                }
                continue;
            }
            bool known = false;
            for (const auto &[key, ptr] : fields) {
                if (key == it.key()) {
                    *ptr = read_number(j, key);
                    known = true;
                }
            }
            if (!known) {
                throw ConfigError("unknown noise parameter '" + it.key() + "'");
            }
        }
        n.validate();
        return n;
    });
}

}  // namespace emo
