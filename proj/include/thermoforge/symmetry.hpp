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

/// \file symmetry.hpp
/// \brief Symmetric-group machinery on (C^d)^{(x)n}: Young diagrams,
/// characters, permutation operators and Schur-Weyl block projectors.

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "thermoforge/qcore.hpp"

namespace thermoforge {

/// Partition of n into nonincreasing positive rows.
struct YoungDiagram {
  std::vector<int> rows;

  int size() const;
  int length() const { return static_cast<int>(rows.size()); }
  /// Shannon entropy (nats) of rows / n.
  double entropy() const;
  std::string to_string() const;

  auto operator<=>(const YoungDiagram&) const = default;
};

/// All partitions of n with at most d rows, lexicographically descending.
std::vector<YoungDiagram> young_diagrams(int n, int d);

/// Cycle type of a permutation, as a nonincreasing list of cycle lengths.
using CycleType = std::vector<int>;
CycleType cycle_type(const std::vector<int>& perm);

/// Irreducible character chi^lambda on the class of the given cycle type
/// (Murnaghan-Nakayama rule, memoized).
std::int64_t character(const YoungDiagram& lambda, const CycleType& cls);

/// Dimension of the S_n irrep, chi^lambda(identity).
std::int64_t irrep_dimension(const YoungDiagram& lambda);

/// Permutation operator with one nonzero per column: |c> -> |target[c]>.
/// pi[k] is the image of tensor position k.
struct SparsePermutation {
  std::vector<int> target;

  Matrix to_dense() const;
  SparsePermutation compose(const SparsePermutation& right) const;  ///< this * right
  double trace() const;
};
SparsePermutation permutation_operator(const std::vector<int>& pi, int d);

/// All permutations of {0..n-1} in lexicographic order.
std::vector<std::vector<int>> all_permutations(int n);

struct SchurWeylBlock {
  YoungDiagram diagram;
  int n = 0;
  int d = 0;
  std::shared_ptr<const RealMatrix> projector;  ///< Real symmetric projector.

  Matrix complex_projector() const { return projector->cast<cplx>(); }
};

/// Pi^lambda = (f^lambda / n!) sum_pi chi^lambda(pi) P(pi); cached per (lambda, n, d).
SchurWeylBlock schur_weyl_projector(const YoungDiagram& lambda, int n, int d);

/// Same projector assembled with the serial reference kernel (uncached).
RealMatrix schur_weyl_projector_serial(const YoungDiagram& lambda, int n, int d);

/// lambda -> tr[Pi^lambda rho^{(x)n}] for a single-copy state rho.
std::map<YoungDiagram, double> spectrum_estimate_distribution(const Matrix& rho, int n);

}  // namespace thermoforge
