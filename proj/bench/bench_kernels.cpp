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


// Parallel, single-threaded and dense reference conjugation on the protocol's
// 625-dimensional register.

#include <random>

#include <benchmark/benchmark.h>

#include "emo/kernels.hpp"

namespace {

using namespace emo;

struct Fixture {
    CMatrix rho;
    kernels::SparseOperator op;
    kernels::TargetMap map;

    explicit Fixture(std::vector<std::size_t> targets) {
        const std::vector<std::size_t> dims{5, 5, 5, 5};
        map = kernels::make_target_map(dims, targets);
        std::mt19937_64 rng(3);
        std::normal_distribution<double> g;
        CMatrix a(625, 625);
        for (Eigen::Index i = 0; i < a.size(); i++) a(i) = cd(g(rng), g(rng));
        rho = a * a.adjoint();
        rho /= rho.trace();
        CMatrix h(static_cast<Eigen::Index>(map.local_dim), static_cast<Eigen::Index>(map.local_dim));
        for (Eigen::Index i = 0; i < h.size(); i++) h(i) = cd(g(rng), g(rng));
        Eigen::HouseholderQR<CMatrix> qr(h);
        op = kernels::SparseOperator::from_dense(qr.householderQ());
    }
};

template <void (*F)(CMatrix &, const kernels::SparseOperator &, const kernels::TargetMap &)>
void BM_Conjugate(benchmark::State &state) {
    Fixture f(state.range(0) == 1 ? std::vector<std::size_t>{0} : std::vector<std::size_t>{0, 2});
    for (auto _ : state) {
        F(f.rho, f.op, f.map);
        benchmark::DoNotOptimize(f.rho.data());
    }
}

BENCHMARK(BM_Conjugate<kernels::conjugate>)->Arg(1)->Arg(2)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Conjugate<kernels::conjugate_single_thread>)->Arg(1)->Arg(2)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Conjugate<kernels::serial::conjugate>)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
