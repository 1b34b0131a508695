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

#include "emo/kernels.hpp"

#include <algorithm>
#include <cassert>

namespace emo::kernels {

TargetMap make_target_map(const std::vector<std::size_t> &dims, const std::vector<std::size_t> &targets) {
    const std::size_t n = dims.size();
    std::vector<std::size_t> stride(n, 1);
    for (std::size_t i = n; i-- > 1;) {
        stride[i - 1] = stride[i] * dims[i];
    }

    TargetMap map;
    map.full_dim = n == 0 ? 1 : stride[0] * dims[0];

    std::vector<bool> is_target(n, false);
    map.local_dim = 1;
    for (auto t : targets) {
        is_target[t] = true;
        map.local_dim *= dims[t];
    }

    // Offsets of the target subspace, first target most significant.
    map.local_offset.assign(map.local_dim, 0);
    for (std::size_t a = 0; a < map.local_dim; a++) {
        std::size_t rem = a;
        std::size_t off = 0;
        for (std::size_t j = targets.size(); j-- > 0;) {
            std::size_t d = dims[targets[j]];
            off += (rem % d) * stride[targets[j]];
            rem /= d;
        }
        map.local_offset[a] = off;
    }

    // Bases: all indices whose target digits are zero.
    std::vector<std::size_t> rest;
    for (std::size_t i = 0; i < n; i++) {
        if (!is_target[i]) {
            rest.push_back(i);
        }
    }
    std::size_t rest_dim = map.full_dim / map.local_dim;
    map.rest_base.assign(rest_dim, 0);
    for (std::size_t r = 0; r < rest_dim; r++) {
        std::size_t rem = r;
        std::size_t off = 0;
        for (std::size_t j = rest.size(); j-- > 0;) {
            std::size_t d = dims[rest[j]];
            off += (rem % d) * stride[rest[j]];
            rem /= d;
        }
        map.rest_base[r] = off;
    }

    map.local_index.assign(map.full_dim, 0);
    for (std::size_t a = 0; a < map.local_dim; a++) {
        for (auto base : map.rest_base) {
            map.local_index[base + map.local_offset[a]] = a;
        }
    }
    return map;
}

SparseOperator SparseOperator::from_dense(const CMatrix &m) {
    assert(m.rows() == m.cols());
    SparseOperator op;
    op.dim = static_cast<std::size_t>(m.rows());
    op.row_start.reserve(op.dim + 1);
    op.row_start.push_back(0);
    for (Eigen::Index r = 0; r < m.rows(); r++) {
        for (Eigen::Index c = 0; c < m.cols(); c++) {
            if (m(r, c) != cd(0.0, 0.0)) {
                op.col.push_back(static_cast<std::size_t>(c));
                op.val.push_back(m(r, c));
            }
        }
        op.row_start.push_back(op.col.size());
    }
    return op;
}

CMatrix SparseOperator::to_dense() const {
    CMatrix m = CMatrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::size_t r = 0; r < dim; r++) {
        for (std::size_t k = row_start[r]; k < row_start[r + 1]; k++) {
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(col[k])) = val[k];
        }
    }
    return m;
}

namespace {

// `Parallel = false` runs the same gather/scatter loops single-threaded; the
// benchmark uses it to separate threading gains from algorithmic ones.
template <bool Parallel>
void left_impl(CMatrix &rho, const SparseOperator &op, const TargetMap &map) {
    const auto D = static_cast<std::ptrdiff_t>(map.full_dim);
    const std::size_t L = map.local_dim;
    cd *data = rho.data();
#pragma omp parallel if (Parallel)
    {
        std::vector<cd> x(L), y(L);
#pragma omp for schedule(static)
        for (std::ptrdiff_t c = 0; c < D; c++) {
            cd *column = data + c * D;
            for (auto base : map.rest_base) {
                for (std::size_t a = 0; a < L; a++) {
                    x[a] = column[base + map.local_offset[a]];
                }
                for (std::size_t a = 0; a < L; a++) {
                    cd acc(0.0, 0.0);
                    for (std::size_t k = op.row_start[a]; k < op.row_start[a + 1]; k++) {
                        acc += op.val[k] * x[op.col[k]];
                    }
                    y[a] = acc;
                }
                for (std::size_t a = 0; a < L; a++) {
                    column[base + map.local_offset[a]] = y[a];
                }
            }
        }
    }
}

template <bool Parallel>
void right_adjoint_impl(CMatrix &rho, const SparseOperator &op, const TargetMap &map) {
    const auto D = static_cast<std::ptrdiff_t>(map.full_dim);
    const std::size_t L = map.local_dim;
    cd *data = rho.data();
#pragma omp parallel if (Parallel)
    {
        std::vector<cd> x(L), y(L);
#pragma omp for schedule(static)
        for (std::ptrdiff_t row = 0; row < D; row++) {
            for (auto base : map.rest_base) {
                for (std::size_t b = 0; b < L; b++) {
                    x[b] = data[static_cast<std::ptrdiff_t>(base + map.local_offset[b]) * D + row];
                }
                // (rho U^dagger)_{row,a} = sum_b rho_{row,b} conj(U_{a,b})
                for (std::size_t a = 0; a < L; a++) {
                    cd acc(0.0, 0.0);
                    for (std::size_t k = op.row_start[a]; k < op.row_start[a + 1]; k++) {
                        acc += std::conj(op.val[k]) * x[op.col[k]];
                    }
                    y[a] = acc;
                }
                for (std::size_t a = 0; a < L; a++) {
                    data[static_cast<std::ptrdiff_t>(base + map.local_offset[a]) * D + row] = y[a];
                }
            }
        }
    }
}

template <bool Parallel>
void hadamard_impl(CMatrix &rho, const CMatrix &factors, const TargetMap &map) {
    const auto D = static_cast<std::ptrdiff_t>(map.full_dim);
    cd *data = rho.data();
#pragma omp parallel for schedule(static) if (Parallel)
    for (std::ptrdiff_t c = 0; c < D; c++) {
        const auto lc = static_cast<Eigen::Index>(map.local_index[static_cast<std::size_t>(c)]);
        for (std::ptrdiff_t r = 0; r < D; r++) {
            const auto lr = static_cast<Eigen::Index>(map.local_index[static_cast<std::size_t>(r)]);
            data[c * D + r] *= factors(lr, lc);
        }
    }
}

}  // namespace

void apply_left(CMatrix &rho, const SparseOperator &op, const TargetMap &map) {
    left_impl<true>(rho, op, map);
}

void apply_right_adjoint(CMatrix &rho, const SparseOperator &op, const TargetMap &map) {
    right_adjoint_impl<true>(rho, op, map);
}

void conjugate(CMatrix &rho, const SparseOperator &op, const TargetMap &map) {
    left_impl<true>(rho, op, map);
    right_adjoint_impl<true>(rho, op, map);
}

void kraus_sum(CMatrix &rho, const std::vector<SparseOperator> &kraus, const TargetMap &map) {
    CMatrix out = CMatrix::Zero(rho.rows(), rho.cols());
    for (const auto &k : kraus) {
        CMatrix term = rho;
        left_impl<true>(term, k, map);
        right_adjoint_impl<true>(term, k, map);
        out += term;
    }
    rho = std::move(out);
}

void hadamard_local(CMatrix &rho, const CMatrix &factors, const TargetMap &map) {
    hadamard_impl<true>(rho, factors, map);
}

void apply_left_single_thread(CMatrix &rho, const SparseOperator &op, const TargetMap &map) {
    left_impl<false>(rho, op, map);
}

void conjugate_single_thread(CMatrix &rho, const SparseOperator &op, const TargetMap &map) {
    left_impl<false>(rho, op, map);
    right_adjoint_impl<false>(rho, op, map);
}

namespace serial {

// Reference path: materialize the embedded operator as a full dense matrix and
// use ordinary matrix products. O(D^3), independent of the gather/scatter loops.
CMatrix embed_dense(const SparseOperator &op, const TargetMap &map) {
    const auto D = static_cast<Eigen::Index>(map.full_dim);
    CMatrix full = CMatrix::Zero(D, D);
    const CMatrix local = op.to_dense();
    for (auto base : map.rest_base) {
        for (std::size_t a = 0; a < map.local_dim; a++) {
            for (std::size_t b = 0; b < map.local_dim; b++) {
                full(static_cast<Eigen::Index>(base + map.local_offset[a]),
                     static_cast<Eigen::Index>(base + map.local_offset[b])) =
                    local(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
            }
        }
    }
    return full;
}

void apply_left(CMatrix &rho, const SparseOperator &op, const TargetMap &map) {
    rho = embed_dense(op, map) * rho;
}

void apply_right_adjoint(CMatrix &rho, const SparseOperator &op, const TargetMap &map) {
    rho = rho * embed_dense(op, map).adjoint();
}

void conjugate(CMatrix &rho, const SparseOperator &op, const TargetMap &map) {
    CMatrix u = embed_dense(op, map);
    rho = u * rho * u.adjoint();
}

void kraus_sum(CMatrix &rho, const std::vector<SparseOperator> &kraus, const TargetMap &map) {
    CMatrix out = CMatrix::Zero(rho.rows(), rho.cols());
    for (const auto &k : kraus) {
        CMatrix u = embed_dense(k, map);
        out += u * rho * u.adjoint();
    }
    rho = std::move(out);
}

void hadamard_local(CMatrix &rho, const CMatrix &factors, const TargetMap &map) {
    for (Eigen::Index r = 0; r < rho.rows(); r++) {
        for (Eigen::Index c = 0; c < rho.cols(); c++) {
            rho(r, c) *= factors(static_cast<Eigen::Index>(map.local_index[static_cast<std::size_t>(r)]),
                                 static_cast<Eigen::Index>(map.local_index[static_cast<std::size_t>(c)]));
        }
    }
}

}  // namespace serial
}  // namespace emo::kernels
