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

// Composite registers of ion qudits and Fock-truncated bosonic modes, and
// density-matrix states over them.

#ifndef EMO_QSTATE_HPP
#define EMO_QSTATE_HPP

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "emo/kernels.hpp"

namespace emo {

enum class SubsystemKind { IonQudit, BosonMode };

struct SubsystemSpec {
    SubsystemKind kind = SubsystemKind::IonQudit;
    std::size_t dimension = 2;
    std::string label;

    static SubsystemSpec qudit(std::string label, std::size_t levels);
    /// A mode truncated to Fock states |0>..|cutoff>, i.e. dimension cutoff + 1.
    static SubsystemSpec mode(std::string label, std::size_t cutoff);

    bool operator==(const SubsystemSpec &other) const = default;
};

/// label -> level (qudit) or Fock number (mode).
using LevelAssignment = std::map<std::string, std::size_t>;

/// Ordered tensor product of subsystems; the first subsystem is the most
/// significant digit of the basis index.
class Register {
   public:
    Register() = default;
    explicit Register(std::vector<SubsystemSpec> subsystems);

    const std::vector<SubsystemSpec> &subsystems() const {
        return subsystems_;
    }
    std::size_t size() const {
        return subsystems_.size();
    }
    std::size_t total_dimension() const {
        return total_dimension_;
    }
    std::vector<std::size_t> dimensions() const;

    bool contains(const std::string &label) const;
    /// Position of `label`; throws ConfigError when absent.
    std::size_t index_of(const std::string &label) const;
    std::vector<std::size_t> indices_of(const std::vector<std::string> &labels) const;
    const SubsystemSpec &at(const std::string &label) const;

    /// Full basis index of a complete assignment (every subsystem must appear).
    std::size_t basis_index(const LevelAssignment &assignment) const;
    /// Inverse of basis_index.
    std::vector<std::size_t> digits(std::size_t basis_index) const;

    /// Register holding only `keep`, in this register's order.
    Register restricted_to(const std::vector<std::string> &keep) const;

    kernels::TargetMap target_map(const std::vector<std::string> &targets) const;

    bool operator==(const Register &other) const {
        return subsystems_ == other.subsystems_;
    }

   private:
    std::vector<SubsystemSpec> subsystems_;
    std::size_t total_dimension_ = 1;
};

struct PureState {
    Register reg;
    CVector amplitudes;
};

/// Density matrix over a register.
///
/// Construction checks only shapes; physicality (unit trace, Hermiticity,
/// positivity) is checked on demand with `physicality_violation`, because the
/// protocol executor audits after every step with its own tolerance policy.
class QuantumState {
   public:
    QuantumState(Register reg, CMatrix rho);

    const Register &reg() const {
        return reg_;
    }
    const CMatrix &matrix() const {
        return rho_;
    }
    CMatrix &mutable_matrix() {
        return rho_;
    }

    double trace() const;
    double hermiticity_error() const;
    double min_eigenvalue() const;
    /// Diagonal of rho (populations of the computational basis).
    Eigen::VectorXd populations() const;

    /// Empty when the state is physical within `tol`; otherwise a description.
    /// `check_positivity` runs a full Hermitian eigen-decomposition.
    std::optional<std::string> physicality_violation(double tol = 1e-9, bool check_positivity = true) const;

   private:
    Register reg_;
    CMatrix rho_;
};

QuantumState from_pure(const PureState &psi);
PureState basis_ket(const Register &reg, const LevelAssignment &assignment);
QuantumState basis_state(const Register &reg, const LevelAssignment &assignment);

/// Geometric occupation p(n) = nbar^n / (1 + nbar)^(n+1), renormalized over
/// |0>..|cutoff>.
QuantumState thermal_mode_state(double n_bar, std::size_t cutoff, const std::string &label = "mode");

/// rho -> U rho U^dagger with `op` acting on `targets` (in the given order).
/// Throws ConfigError on dimension mismatch or if `op` is not unitary within 1e-9.
QuantumState embed_and_apply(const QuantumState &state, const CMatrix &op, const std::vector<std::string> &targets);

/// In-place variant without the unitarity check (hot path for the executor).
void apply_unitary(QuantumState &state, const kernels::SparseOperator &op, const std::vector<std::string> &targets);

/// rho -> sum_k K rho K^dagger. Throws ConfigError if sum K^dagger K != 1 within 1e-6.
QuantumState apply_channel(const QuantumState &state, const std::vector<CMatrix> &kraus,
                           const std::vector<std::string> &targets);
void apply_channel_inplace(QuantumState &state, const std::vector<kernels::SparseOperator> &kraus,
                           const std::vector<std::string> &targets);

QuantumState partial_trace(const QuantumState &state, const std::vector<std::string> &keep);

/// a (x) b, with b's subsystems appended after a's. Labels must stay unique.
QuantumState tensor_product(const QuantumState &a, const QuantumState &b);

/// Trace out `labels` and put `replacement` in their place (same register order).
/// `replacement` must be a state over exactly those subsystems, in that order.
QuantumState replace_subsystems(const QuantumState &state, const std::vector<std::string> &labels,
                                const QuantumState &replacement);

/// <psi| rho |psi>. Throws ConfigError if the registers differ.
double fidelity(const QuantumState &state, const PureState &reference);

/// <bra| rho |ket>.
cd coherence_element(const QuantumState &state, const LevelAssignment &bra, const LevelAssignment &ket);

/// Trace distance 1/2 ||a - b||_1 between states on the same register.
double trace_distance(const QuantumState &a, const QuantumState &b);

}  // namespace emo

#endif
