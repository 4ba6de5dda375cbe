// Copyright 2026 The Thermoforge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Serial versus OpenMP kernels on Schur-Weyl-sized inputs. Set
// OMP_NUM_THREADS to compare thread counts.

#include <benchmark/benchmark.h>

#include <vector>

#include "thermoforge/kernels.hpp"
#include "thermoforge/random.hpp"
#include "thermoforge/symmetry.hpp"

namespace tf = thermoforge;
namespace k = thermoforge::kernels;

namespace {

std::vector<double> unit_coeffs(std::size_t count) { return std::vector<double>(count, 1.0); }

template <bool kParallel>
void BM_PermutationSum(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto perms = tf::all_permutations(n);
  const auto coeffs = unit_coeffs(perms.size());
  for (auto _ : state) {
    tf::RealMatrix m = kParallel ? k::permutation_sum_parallel(perms, coeffs, 2)
                                 : k::permutation_sum_serial(perms, coeffs, 2);
    benchmark::DoNotOptimize(m.data());
  }
}

template <bool kParallel>
void BM_Gather(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  tf::CounterRng rng(1);
  const tf::Dims dims(n, 2);
  tf::Indices order(n);
  for (int i = 0; i < n; ++i) order[i] = n - 1 - i;
  const tf::Matrix op = tf::ginibre(1 << n, 1 << n, rng);
  const auto map = k::subsystem_index_map_serial(dims, order);
  for (auto _ : state) {
    tf::Matrix out = kParallel ? k::gather_parallel(op, map) : k::gather_serial(op, map);
    benchmark::DoNotOptimize(out.data());
  }
}

template <bool kParallel>
void BM_ScatterRows(benchmark::State& state) {
  const int dim = 1 << state.range(0);
  tf::CounterRng rng(2);
  const tf::RealMatrix q = tf::ginibre(dim, dim, rng).real();
  std::vector<int> bin(dim);
  for (int r = 0; r < dim; ++r) bin[r] = r % 5;
  for (auto _ : state) {
    std::vector<tf::RealMatrix> bins(5, tf::RealMatrix::Zero(dim, dim));
    if (kParallel)
      k::scatter_rows_parallel(q, bin, bins);
    else
      k::scatter_rows_serial(q, bin, bins);
    benchmark::DoNotOptimize(bins.front().data());
  }
}

template <bool kParallel>
void BM_Pinch(benchmark::State& state) {
  const int dim = 1 << state.range(0);
  tf::CounterRng rng(3);
  const tf::Matrix rho = tf::random_density(dim, rng);
  std::vector<tf::Matrix> proj(4, tf::Matrix::Zero(dim, dim));
  for (int i = 0; i < dim; ++i) proj[i % 4](i, i) = 1.0;
  for (auto _ : state) {
    tf::Matrix out = kParallel ? k::pinch_parallel(proj, rho) : k::pinch_serial(proj, rho);
    benchmark::DoNotOptimize(out.data());
  }
}

BENCHMARK(BM_PermutationSum<false>)->DenseRange(4, 7);
BENCHMARK(BM_PermutationSum<true>)->DenseRange(4, 7);
BENCHMARK(BM_Gather<false>)->DenseRange(6, 10, 2);
BENCHMARK(BM_Gather<true>)->DenseRange(6, 10, 2);
BENCHMARK(BM_ScatterRows<false>)->DenseRange(6, 9);
BENCHMARK(BM_ScatterRows<true>)->DenseRange(6, 9);
BENCHMARK(BM_Pinch<false>)->DenseRange(5, 8);
BENCHMARK(BM_Pinch<true>)->DenseRange(5, 8);

}  // namespace

BENCHMARK_MAIN();
