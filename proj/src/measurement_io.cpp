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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "emo/errors.hpp"
#include "emo/measurement.hpp"

namespace emo {

namespace {

constexpr const char *kCsvHeader = "phi_p,parity,std_error,shots";

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string slurp(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void dump(const std::string &path, const std::string &text) {
    std::ofstream out(path);
    if (!out) {
        throw ConfigError("cannot write '" + path + "'");
    }
    out << text;
}

double parse_number(const std::string &field, std::size_t line) {
    try {
        std::size_t used = 0;
        double v = std::stod(field, &used);
        if (used != field.size()) {
            throw std::invalid_argument(field);
        }
        return v;
    } catch (const std::exception &) {
        throw ConfigError("line " + std::to_string(line) + ": '" + field + "' is not a number");
    }
}

}  // namespace

std::string parity_csv(const std::vector<ParityPoint> &points) {
    std::string out = std::string(kCsvHeader) + "\n";
    for (const auto &p : points) {
        out += format_double(p.phi_p) + "," + format_double(p.parity) + "," + format_double(p.std_error) + "," +
               std::to_string(p.shots) + "\n";
    }
    return out;
}

std::vector<ParityPoint> parse_parity_csv(const std::string &text) {
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    std::vector<ParityPoint> points;
    bool header = false;
    while (std::getline(in, line)) {
        lineno++;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        if (!header) {
            if (line != kCsvHeader) {
                throw ConfigError("parity CSV must start with the header '" + std::string(kCsvHeader) + "'");
            }
            header = true;
            continue;
        }
        std::vector<std::string> fields;
        std::stringstream row(line);
        std::string f;
        while (std::getline(row, f, ',')) {
            fields.push_back(f);
        }
        if (fields.size() != 4) {
            throw ConfigError("line " + std::to_string(lineno) + ": expected 4 fields");
        }
        ParityPoint p;
        p.phi_p = parse_number(fields[0], lineno);
        p.parity = parse_number(fields[1], lineno);
        p.std_error = parse_number(fields[2], lineno);
        const double shots = parse_number(fields[3], lineno);
        if (shots < 0 || shots != std::floor(shots)) {
            throw ConfigError("line " + std::to_string(lineno) + ": shots must be a non-negative integer");
        }
        p.shots = static_cast<std::size_t>(shots);
        points.push_back(p);
    }
    if (!header) {
        throw ConfigError("parity CSV is empty");
    }
    return points;
}

void write_parity_csv(const std::string &path, const std::vector<ParityPoint> &points) {
    dump(path, parity_csv(points));
}

std::vector<ParityPoint> read_parity_csv(const std::string &path) {
    return parse_parity_csv(slurp(path));
}

std::string fit_json(const FitResult &fit) {
    nlohmann::ordered_json j;
    j["C2"] = fit.C2;
    j["C1"] = fit.C1;
    j["C0"] = fit.C0;
    j["phi2"] = fit.phi2;
    j["phi1"] = fit.phi1;
    nlohmann::json cov = nlohmann::json::array();
    for (int r = 0; r < 5; r++) {
        nlohmann::json row = nlohmann::json::array();
        for (int c = 0; c < 5; c++) {
            row.push_back(fit.cov(r, c));
        }
        cov.push_back(row);
    }
    j["cov"] = cov;
    j["entangled"] = entanglement_witness(fit).entangled;
    return j.dump(2) + "\n";
}

FitResult parse_fit_json(const std::string &text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception &e) {
        throw ConfigError(std::string("fit JSON: ") + e.what());
    }
    FitResult fit;
    try {
        fit.C2 = j.at("C2").get<double>();
        fit.C1 = j.at("C1").get<double>();
        fit.C0 = j.at("C0").get<double>();
        fit.phi2 = j.at("phi2").get<double>();
        fit.phi1 = j.at("phi1").get<double>();
        const auto &cov = j.at("cov");
        if (!cov.is_array() || cov.size() != 5) {
            throw ConfigError("fit JSON: cov must be a 5x5 array");
        }
        for (int r = 0; r < 5; r++) {
            if (cov[static_cast<std::size_t>(r)].size() != 5) {
                throw ConfigError("fit JSON: cov must be a 5x5 array");
            }
            for (int c = 0; c < 5; c++) {
                fit.cov(r, c) = cov[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)].get<double>();
            }
        }
        j.at("entangled").get<bool>();
    } catch (const nlohmann::json::exception &e) {
        throw ConfigError(std::string("fit JSON: ") + e.what());
    }
    return fit;
}

std::string populations_json(const PopulationEstimate &p) {
    nlohmann::ordered_json j;
    j["P_up_up"] = p.p_up_up;
    j["P_down_down"] = p.p_down_down;
    j["P_mixed"] = p.p_mixed;
    j["residual"] = p.residual;
    j["std_error"] = {std::sqrt(std::max(p.covariance(0, 0), 0.0)), std::sqrt(std::max(p.covariance(1, 1), 0.0)),
                      std::sqrt(std::max(p.covariance(2, 2), 0.0))};
    nlohmann::json cov = nlohmann::json::array();
    for (int r = 0; r < 3; r++) {
        cov.push_back({p.covariance(r, 0), p.covariance(r, 1), p.covariance(r, 2)});
    }
    j["cov"] = cov;
    j["shots"] = p.shots;
    return j.dump(2) + "\n";
}

}  // namespace emo
