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

#pragma once

// Hot loops with two implementations each: a plain serial reference and an
// OpenMP version. Both produce bit-identical results; the parallel versions
// only split rows across threads and never reduce across them.

#include <vector>

#include "thermoforge/qcore.hpp"

namespace thermoforge::kernels {

/// map[new_index] = old_index for the reordering of tensor factors.
std::vector<int> subsystem_index_map_serial(const Dims& dims, const Indices& order);
std::vector<int> subsystem_index_map_parallel(const Dims& dims, const Indices& order);

/// out(r, c) = op(map[r], map[c]).
Matrix gather_serial(const Matrix& op, const std::vector<int>& map);
Matrix gather_parallel(const Matrix& op, const std::vector<int>& map);

/// sum_t coeffs[t] P(perms[t]) on (C^d)^{(x)n}, where P(pi) sends the tensor
/// factor at position k to position pi[k].
RealMatrix permutation_sum_serial(const std::vector<std::vector<int>>& perms,
                                  const std::vector<double>& coeffs, int d);
RealMatrix permutation_sum_parallel(const std::vector<std::vector<int>>& perms,
                                    const std::vector<double>& coeffs, int d);

/// bins[row_bin[r]](r, c) += q(r, c) for every nonzero entry.
void scatter_rows_serial(const RealMatrix& q, const std::vector<int>& row_bin,
                         std::vector<RealMatrix>& bins);
void scatter_rows_parallel(const RealMatrix& q, const std::vector<int>& row_bin,
                           std::vector<RealMatrix>& bins);

/// sum_w P_w rho P_w^dagger.
Matrix pinch_serial(const std::vector<Matrix>& projectors, const Matrix& rho);
Matrix pinch_parallel(const std::vector<Matrix>& projectors, const Matrix& rho);

/// Default entry points used by the library.
inline std::vector<int> subsystem_index_map(const Dims& dims, const Indices& order) {
  return subsystem_index_map_parallel(dims, order);
}
inline Matrix gather(const Matrix& op, const std::vector<int>& map) {
  return gather_parallel(op, map);
}
inline RealMatrix permutation_sum(const std::vector<std::vector<int>>& perms,
                                  const std::vector<double>& coeffs, int d) {
  return permutation_sum_parallel(perms, coeffs, d);
}
inline void scatter_rows(const RealMatrix& q, const std::vector<int>& row_bin,
                         std::vector<RealMatrix>& bins) {
  scatter_rows_parallel(q, row_bin, bins);
}
inline Matrix pinch(const std::vector<Matrix>& projectors, const Matrix& rho) {
  return pinch_parallel(projectors, rho);
}

}  // namespace thermoforge::kernels
