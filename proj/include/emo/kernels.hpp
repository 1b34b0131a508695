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

// Density-matrix kernels for operators acting on a subset of a tensor-product
// register. The top-level functions are OpenMP-parallel over matrix columns
// (or rows); `kernels::serial` holds dense reference versions with the same
// contracts (the embedded operator is materialized and multiplied), used by
// the tests and the benchmark target.

#ifndef EMO_KERNELS_HPP
#define EMO_KERNELS_HPP

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace emo {

using cd = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

namespace kernels {

/// Index bookkeeping for an operator on `targets` of a register with
/// subsystem dimensions `dims` (first subsystem most significant).
///
/// Every full basis index decomposes uniquely as rest_base[r] + local_offset[a],
/// where `a` runs over the target subspace in operator order (first target most
/// significant) and `r` over the remaining subsystems.
struct TargetMap {
    std::size_t full_dim = 0;
    std::size_t local_dim = 0;
    std::vector<std::size_t> rest_base;
    std::vector<std::size_t> local_offset;
    /// local_index[i] = the target-subspace index `a` of full basis index i.
    std::vector<std::size_t> local_index;
};

TargetMap make_target_map(const std::vector<std::size_t> &dims, const std::vector<std::size_t> &targets);

/// Row-compressed local operator. Local dimensions here are tiny (<= ~50) but
/// the gates are mostly identity plus a few 2x2 blocks, so skipping zeros pays.
struct SparseOperator {
    std::size_t dim = 0;
    std::vector<std::size_t> row_start;
    std::vector<std::size_t> col;
    std::vector<cd> val;

    static SparseOperator from_dense(const CMatrix &m);
    CMatrix to_dense() const;
};

/// rho <- (op (x) 1) rho
void apply_left(CMatrix &rho, const SparseOperator &op, const TargetMap &map);
/// rho <- rho (op (x) 1)^dagger
void apply_right_adjoint(CMatrix &rho, const SparseOperator &op, const TargetMap &map);
/// rho <- U rho U^dagger
void conjugate(CMatrix &rho, const SparseOperator &op, const TargetMap &map);
/// rho <- sum_k K rho K^dagger
void kraus_sum(CMatrix &rho, const std::vector<SparseOperator> &kraus, const TargetMap &map);
/// rho_ij <- rho_ij * factors(local_index[i], local_index[j]).
/// Covers diagonal unitaries (factors = u u^dagger) and dephasing masks.
void hadamard_local(CMatrix &rho, const CMatrix &factors, const TargetMap &map);

/// Same gather/scatter loops as above with OpenMP disabled.
void apply_left_single_thread(CMatrix &rho, const SparseOperator &op, const TargetMap &map);
void conjugate_single_thread(CMatrix &rho, const SparseOperator &op, const TargetMap &map);

namespace serial {
/// Full D x D matrix of `op` embedded as identity on the non-target subsystems.
CMatrix embed_dense(const SparseOperator &op, const TargetMap &map);
void apply_left(CMatrix &rho, const SparseOperator &op, const TargetMap &map);
void apply_right_adjoint(CMatrix &rho, const SparseOperator &op, const TargetMap &map);
void conjugate(CMatrix &rho, const SparseOperator &op, const TargetMap &map);
void kraus_sum(CMatrix &rho, const std::vector<SparseOperator> &kraus, const TargetMap &map);
void hadamard_local(CMatrix &rho, const CMatrix &factors, const TargetMap &map);
}  // namespace serial

}  // namespace kernels
}  // namespace emo

#endif
