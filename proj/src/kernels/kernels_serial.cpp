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

#include "kernels_common.hpp"

namespace thermoforge::kernels {

std::vector<int> subsystem_index_map_serial(const Dims& dims, const Indices& order) {
  detail::IndexMapPlan plan(dims, order);
  std::vector<int> map(plan.total);
  for (int r = 0; r < plan.total; ++r) map[r] = plan.old_index(r);
  return map;
}

Matrix gather_serial(const Matrix& op, const std::vector<int>& map) {
  const int n = static_cast<int>(map.size());
  Matrix out(n, n);
  for (int c = 0; c < n; ++c)
    for (int r = 0; r < n; ++r) out(r, c) = op(map[r], map[c]);
  return out;
}

RealMatrix permutation_sum_serial(const std::vector<std::vector<int>>& perms,
                                  const std::vector<double>& coeffs, int d) {
  detail::PermutationSumPlan plan(perms, d);
  RealMatrix out = RealMatrix::Zero(plan.total, plan.total);
  std::vector<int> digits(plan.n);
  for (int r = 0; r < plan.total; ++r) {
    plan.digits_of(r, digits);
    for (std::size_t t = 0; t < perms.size(); ++t) out(r, plan.column(digits, t)) += coeffs[t];
  }
  return out;
}

void scatter_rows_serial(const RealMatrix& q, const std::vector<int>& row_bin,
                         std::vector<RealMatrix>& bins) {
  for (Eigen::Index r = 0; r < q.rows(); ++r) {
    RealMatrix& target = bins[row_bin[r]];
    for (Eigen::Index c = 0; c < q.cols(); ++c) {
      const double v = q(r, c);
      if (v != 0.0) target(r, c) += v;
    }
  }
}

Matrix pinch_serial(const std::vector<Matrix>& projectors, const Matrix& rho) {
  Matrix out = Matrix::Zero(rho.rows(), rho.cols());
  for (const Matrix& p : projectors) {
    Matrix term = p * rho * p.adjoint();
    out += term;
  }
  return out;
}

}  // namespace thermoforge::kernels
