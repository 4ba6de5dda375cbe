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

#include <stdexcept>
#include <vector>

#include "thermoforge/kernels.hpp"

namespace thermoforge::kernels::detail {

// Strides for turning a new multi-index into an old flat index.
struct IndexMapPlan {
  IndexMapPlan(const Dims& dims, const Indices& order) {
    const int k = static_cast<int>(dims.size());
    if (static_cast<int>(order.size()) != k) throw std::invalid_argument("order size mismatch");
    std::vector<int> old_stride(k, 1);
    for (int i = k - 2; i >= 0; --i) old_stride[i] = old_stride[i + 1] * dims[i + 1];
    std::vector<bool> seen(k, false);
    new_dims.resize(k);
    stride.resize(k);
    for (int i = 0; i < k; ++i) {
      const int o = order[i];
      if (o < 0 || o >= k || seen[o]) throw std::invalid_argument("order is not a permutation");
      seen[o] = true;
      new_dims[i] = dims[o];
      stride[i] = old_stride[o];
    }
    total = 1;
    for (int d : dims) total *= d;
  }

  int old_index(int r) const {
    int idx = 0;
    for (int i = static_cast<int>(new_dims.size()) - 1; i >= 0; --i) {
      idx += (r % new_dims[i]) * stride[i];
      r /= new_dims[i];
    }
    return idx;
  }

  std::vector<int> new_dims;
  std::vector<int> stride;
  int total = 1;
};

// Row r with digits j is hit from column c with digits i_k = j_{pi(k)}.
struct PermutationSumPlan {
  PermutationSumPlan(const std::vector<std::vector<int>>& perms_in, int d_in)
      : perms(perms_in), d(d_in) {
    if (perms.empty()) throw std::invalid_argument("empty permutation list");
    n = static_cast<int>(perms.front().size());
    total = 1;
    for (int i = 0; i < n; ++i) total *= d;
  }

  void digits_of(int r, std::vector<int>& digits) const {
    for (int k = n - 1; k >= 0; --k) {
      digits[k] = r % d;
      r /= d;
    }
  }

  int column(const std::vector<int>& digits, std::size_t t) const {
    const std::vector<int>& pi = perms[t];
    int c = 0;
    for (int k = 0; k < n; ++k) c = c * d + digits[pi[k]];
    return c;
  }

  const std::vector<std::vector<int>>& perms;
  int d;
  int n = 0;
  int total = 1;
};

}  // namespace thermoforge::kernels::detail
