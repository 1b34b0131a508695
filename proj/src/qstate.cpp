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

#include "emo/qstate.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "emo/errors.hpp"

namespace emo {

namespace {

constexpr double kUnitarityTol = 1e-9;
constexpr double kKrausTol = 1e-6;

Eigen::Index eidx(std::size_t i) {
    return static_cast<Eigen::Index>(i);
}

}  // namespace

SubsystemSpec SubsystemSpec::qudit(std::string label, std::size_t levels) {
    return SubsystemSpec{SubsystemKind::IonQudit, levels, std::move(label)};
}

SubsystemSpec SubsystemSpec::mode(std::string label, std::size_t cutoff) {
    return SubsystemSpec{SubsystemKind::BosonMode, cutoff + 1, std::move(label)};
}

Register::Register(std::vector<SubsystemSpec> subsystems) : subsystems_(std::move(subsystems)) {
    std::set<std::string> seen;
    total_dimension_ = 1;
    for (const auto &s : subsystems_) {
        if (s.dimension < 2) {
            throw ConfigError("subsystem '" + s.label + "' has dimension < 2");
        }
        if (!seen.insert(s.label).second) {
            throw ConfigError("duplicate subsystem label '" + s.label + "'");
        }
        total_dimension_ *= s.dimension;
    }
}

std::vector<std::size_t> Register::dimensions() const {
    std::vector<std::size_t> dims;
    dims.reserve(subsystems_.size());
    for (const auto &s : subsystems_) {
        dims.push_back(s.dimension);
    }
    return dims;
}

bool Register::contains(const std::string &label) const {
    return std::any_of(subsystems_.begin(), subsystems_.end(), [&](const auto &s) { return s.label == label; });
}

std::size_t Register::index_of(const std::string &label) const {
    for (std::size_t i = 0; i < subsystems_.size(); i++) {
        if (subsystems_[i].label == label) {
            return i;
        }
    }
    throw ConfigError("unknown subsystem label '" + label + "'");
}

std::vector<std::size_t> Register::indices_of(const std::vector<std::string> &labels) const {
    std::vector<std::size_t> out;
    std::set<std::size_t> seen;
    for (const auto &l : labels) {
        auto i = index_of(l);
        if (!seen.insert(i).second) {
            throw ConfigError("subsystem '" + l + "' listed twice");
        }
        out.push_back(i);
    }
    return out;
}

const SubsystemSpec &Register::at(const std::string &label) const {
    return subsystems_[index_of(label)];
}

std::size_t Register::basis_index(const LevelAssignment &assignment) const {
    for (const auto &[label, level] : assignment) {
        const auto &s = at(label);
        if (level >= s.dimension) {
            throw ConfigError("level " + std::to_string(level) + " out of range for '" + label + "' (dimension " +
                              std::to_string(s.dimension) + ")");
        }
    }
    std::size_t index = 0;
    for (const auto &s : subsystems_) {
        auto it = assignment.find(s.label);
        if (it == assignment.end()) {
            throw ConfigError("assignment is missing subsystem '" + s.label + "'");
        }
        index = index * s.dimension + it->second;
    }
    return index;
}

std::vector<std::size_t> Register::digits(std::size_t basis_index) const {
    std::vector<std::size_t> d(subsystems_.size());
    for (std::size_t i = subsystems_.size(); i-- > 0;) {
        d[i] = basis_index % subsystems_[i].dimension;
        basis_index /= subsystems_[i].dimension;
    }
    return d;
}

Register Register::restricted_to(const std::vector<std::string> &keep) const {
    auto idx = indices_of(keep);
    std::sort(idx.begin(), idx.end());
    std::vector<SubsystemSpec> subs;
    for (auto i : idx) {
        subs.push_back(subsystems_[i]);
    }
    return Register(std::move(subs));
}

kernels::TargetMap Register::target_map(const std::vector<std::string> &targets) const {
    return kernels::make_target_map(dimensions(), indices_of(targets));
}

QuantumState::QuantumState(Register reg, CMatrix rho) : reg_(std::move(reg)), rho_(std::move(rho)) {
    const auto d = eidx(reg_.total_dimension());
    if (rho_.rows() != d || rho_.cols() != d) {
        throw ConfigError("density matrix shape does not match register dimension " + std::to_string(d));
    }
}

double QuantumState::trace() const {
    return rho_.trace().real();
}

double QuantumState::hermiticity_error() const {
    return (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff();
}

double QuantumState::min_eigenvalue() const {
    CMatrix h = 0.5 * (rho_ + rho_.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

Eigen::VectorXd QuantumState::populations() const {
    return rho_.diagonal().real();
}

std::optional<std::string> QuantumState::physicality_violation(double tol, bool check_positivity) const {
    std::ostringstream msg;
    double tr_err = std::abs(rho_.trace() - cd(1.0, 0.0));
    if (tr_err > tol) {
        msg << "trace deviates from 1 by " << tr_err;
        return msg.str();
    }
    double herm = hermiticity_error();
    if (herm > tol) {
        msg << "not Hermitian (max |rho - rho^dagger| = " << herm << ")";
        return msg.str();
    }
    double min_diag = rho_.diagonal().real().minCoeff();
    if (min_diag < -tol) {
        msg << "negative population " << min_diag;
        return msg.str();
    }
    if (check_positivity) {
        double min_ev = min_eigenvalue();
        if (min_ev < -tol) {
            msg << "negative eigenvalue " << min_ev;
            return msg.str();
        }
    }
    return std::nullopt;
}

QuantumState from_pure(const PureState &psi) {
    if (static_cast<std::size_t>(psi.amplitudes.size()) != psi.reg.total_dimension()) {
        throw ConfigError("amplitude vector does not match register dimension");
    }
    return QuantumState(psi.reg, psi.amplitudes * psi.amplitudes.adjoint());
}

PureState basis_ket(const Register &reg, const LevelAssignment &assignment) {
    CVector v = CVector::Zero(eidx(reg.total_dimension()));
    v(eidx(reg.basis_index(assignment))) = 1.0;
    return PureState{reg, v};
}

QuantumState basis_state(const Register &reg, const LevelAssignment &assignment) {
    return from_pure(basis_ket(reg, assignment));
}

QuantumState thermal_mode_state(double n_bar, std::size_t cutoff, const std::string &label) {
    if (!(n_bar >= 0.0)) {
        throw ConfigError("mean occupation must be non-negative");
    }
    if (cutoff < 1) {
        throw ConfigError("Fock cutoff must be at least 1");
    }
    Register reg({SubsystemSpec::mode(label, cutoff)});
    Eigen::VectorXd p(eidx(cutoff + 1));
    // p(n) = nbar^n / (1+nbar)^(n+1) = (1 - q) q^n, q = nbar / (1 + nbar)
    double q = n_bar / (1.0 + n_bar);
    double pn = 1.0 / (1.0 + n_bar);
    for (std::size_t n = 0; n <= cutoff; n++) {
        p(eidx(n)) = pn;
        pn *= q;
    }
    p /= p.sum();
    return QuantumState(reg, p.cast<cd>().asDiagonal());
}

QuantumState embed_and_apply(const QuantumState &state, const CMatrix &op, const std::vector<std::string> &targets) {
    auto map = state.reg().target_map(targets);
    if (op.rows() != eidx(map.local_dim) || op.cols() != eidx(map.local_dim)) {
        throw ConfigError("operator dimension " + std::to_string(op.rows()) + " does not match target dimension " +
                          std::to_string(map.local_dim));
    }
    double unitarity = (op.adjoint() * op - CMatrix::Identity(op.rows(), op.cols())).cwiseAbs().maxCoeff();
    if (unitarity > kUnitarityTol) {
        throw ConfigError("operator is not unitary (deviation " + std::to_string(unitarity) + ")");
    }
    QuantumState out = state;
    kernels::conjugate(out.mutable_matrix(), kernels::SparseOperator::from_dense(op), map);
    return out;
}

void apply_unitary(QuantumState &state, const kernels::SparseOperator &op, const std::vector<std::string> &targets) {
    auto map = state.reg().target_map(targets);
    if (op.dim != map.local_dim) {
        throw ConfigError("operator dimension does not match target dimension");
    }
    kernels::conjugate(state.mutable_matrix(), op, map);
}

QuantumState apply_channel(const QuantumState &state, const std::vector<CMatrix> &kraus,
                           const std::vector<std::string> &targets) {
    auto map = state.reg().target_map(targets);
    if (kraus.empty()) {
        throw ConfigError("empty Kraus set");
    }
    CMatrix completeness = CMatrix::Zero(eidx(map.local_dim), eidx(map.local_dim));
    std::vector<kernels::SparseOperator> ops;
    for (const auto &k : kraus) {
        if (k.rows() != eidx(map.local_dim) || k.cols() != eidx(map.local_dim)) {
            throw ConfigError("Kraus operator dimension does not match target dimension");
        }
        completeness += k.adjoint() * k;
        ops.push_back(kernels::SparseOperator::from_dense(k));
    }
    double err = (completeness - CMatrix::Identity(completeness.rows(), completeness.cols())).cwiseAbs().maxCoeff();
    if (err > kKrausTol) {
        throw ConfigError("Kraus set is not trace preserving (deviation " + std::to_string(err) + ")");
    }
    QuantumState out = state;
    kernels::kraus_sum(out.mutable_matrix(), ops, map);
    return out;
}

void apply_channel_inplace(QuantumState &state, const std::vector<kernels::SparseOperator> &kraus,
                           const std::vector<std::string> &targets) {
    auto map = state.reg().target_map(targets);
    kernels::kraus_sum(state.mutable_matrix(), kraus, map);
}

QuantumState partial_trace(const QuantumState &state, const std::vector<std::string> &keep) {
    Register kept = state.reg().restricted_to(keep);
    std::vector<std::string> ordered;
    for (const auto &s : kept.subsystems()) {
        ordered.push_back(s.label);
    }
    auto map = state.reg().target_map(ordered);
    const auto &rho = state.matrix();
    CMatrix out = CMatrix::Zero(eidx(map.local_dim), eidx(map.local_dim));
    for (std::size_t b = 0; b < map.local_dim; b++) {
        for (std::size_t a = 0; a < map.local_dim; a++) {
            cd acc(0.0, 0.0);
            for (auto base : map.rest_base) {
                acc += rho(eidx(base + map.local_offset[a]), eidx(base + map.local_offset[b]));
            }
            out(eidx(a), eidx(b)) = acc;
        }
    }
    return QuantumState(std::move(kept), std::move(out));
}

QuantumState tensor_product(const QuantumState &a, const QuantumState &b) {
    std::vector<SubsystemSpec> subs = a.reg().subsystems();
    for (const auto &s : b.reg().subsystems()) {
        subs.push_back(s);
    }
    Register reg(std::move(subs));
    const auto da = a.matrix().rows();
    const auto db = b.matrix().rows();
    CMatrix out(da * db, da * db);
    for (Eigen::Index i = 0; i < da; i++) {
        for (Eigen::Index j = 0; j < da; j++) {
            out.block(i * db, j * db, db, db) = a.matrix()(i, j) * b.matrix();
        }
    }
    return QuantumState(std::move(reg), std::move(out));
}

QuantumState replace_subsystems(const QuantumState &state, const std::vector<std::string> &labels,
                                const QuantumState &replacement) {
    const auto &reg = state.reg();
    auto idx = reg.indices_of(labels);
    if (replacement.reg().size() != labels.size()) {
        throw ConfigError("replacement state does not cover the replaced subsystems");
    }
    for (std::size_t j = 0; j < labels.size(); j++) {
        if (replacement.reg().subsystems()[j].dimension != reg.subsystems()[idx[j]].dimension) {
            throw ConfigError("replacement dimension mismatch for '" + labels[j] + "'");
        }
    }
    auto map = reg.target_map(labels);
    const auto &rho = state.matrix();
    const std::size_t R = map.rest_base.size();

    // Reduced state of the untouched subsystems, indexed like map.rest_base.
    CMatrix rest = CMatrix::Zero(eidx(R), eidx(R));
    for (std::size_t s = 0; s < R; s++) {
        for (std::size_t r = 0; r < R; r++) {
            cd acc(0.0, 0.0);
            for (std::size_t a = 0; a < map.local_dim; a++) {
                acc += rho(eidx(map.rest_base[r] + map.local_offset[a]), eidx(map.rest_base[s] + map.local_offset[a]));
            }
            rest(eidx(r), eidx(s)) = acc;
        }
    }

    const auto &sigma = replacement.matrix();
    CMatrix out(rho.rows(), rho.cols());
    for (std::size_t s = 0; s < R; s++) {
        for (std::size_t b = 0; b < map.local_dim; b++) {
            const auto col = eidx(map.rest_base[s] + map.local_offset[b]);
            for (std::size_t r = 0; r < R; r++) {
                const cd rr = rest(eidx(r), eidx(s));
                for (std::size_t a = 0; a < map.local_dim; a++) {
                    out(eidx(map.rest_base[r] + map.local_offset[a]), col) = rr * sigma(eidx(a), eidx(b));
                }
            }
        }
    }
    return QuantumState(reg, std::move(out));
}

double fidelity(const QuantumState &state, const PureState &reference) {
    if (!(state.reg() == reference.reg)) {
        throw ConfigError("fidelity: register mismatch between state and reference");
    }
    double norm = reference.amplitudes.squaredNorm();
    if (norm <= 0.0) {
        throw ConfigError("fidelity: zero reference vector");
    }
    cd f = reference.amplitudes.dot(state.matrix() * reference.amplitudes) / norm;
    return std::clamp(f.real(), 0.0, 1.0);
}

cd coherence_element(const QuantumState &state, const LevelAssignment &bra, const LevelAssignment &ket) {
    return state.matrix()(eidx(state.reg().basis_index(bra)), eidx(state.reg().basis_index(ket)));
}

double trace_distance(const QuantumState &a, const QuantumState &b) {
    if (!(a.reg() == b.reg())) {
        throw ConfigError("trace_distance: register mismatch");
    }
    CMatrix diff = a.matrix() - b.matrix();
    diff = 0.5 * (diff + diff.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(diff, Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

}  // namespace emo
