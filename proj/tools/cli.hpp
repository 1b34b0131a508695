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

// Command-line front end. Everything lives in a library so tests can drive the
// commands in-process.

#ifndef EMO_TOOLS_CLI_HPP
#define EMO_TOOLS_CLI_HPP

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "emo/measurement.hpp"
#include "emo/protocol.hpp"

namespace emo::cli {

enum ExitCode : int { kOk = 0, kConfigError = 2, kNumericalError = 3 };

enum class Dimension { Frequency, Length, Time };

/// "2.3MHz", "0.24 mm", "25kHz", "200us" -> SI value (Hz, m, s). A bare
/// number is multiplied by `bare_scale`. Throws ConfigError.
double parse_quantity(const std::string &text, Dimension dim, double bare_scale = 1.0);

struct RunConfig {
    Variant variant = Variant::Emo;
    std::size_t shots = 500;
    std::size_t phases = 16;
    std::uint64_t seed = 1;
    NoiseModel noise;
    DetectionModel detection;
    SamplingMode sampling = SamplingMode::Ensemble;
    std::string out_dir = ".";
    /// Run this plan document instead of the built-in one for `variant`.
    std::optional<std::string> plan_path;

    /// shots >= 1 unless analytic; >= 5 phases.
    void validate() const;
};

/// Keys: variant, shots, phases, seed, noise ("off", "default" or an object of
/// overrides), detection, sampling ("analytic" | "ensemble" | "per_shot"),
/// out_dir, plan. Absent keys keep the values in `base`.
RunConfig run_config_from_json(const std::string &text, const RunConfig &base = {});

/// Seed used when neither a flag nor a config file gives one: $EMO_SEED, else 1.
std::uint64_t default_seed();

/// Full command line (args[0] is the program name). Returns the exit code.
int main_entry(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

}  // namespace emo::cli

#endif
