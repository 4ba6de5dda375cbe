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

// Shared fixtures for the unit and acceptance tests.

#include <cmath>
#include <vector>

#include "thermoforge/qcore.hpp"
#include "thermoforge/symmetry.hpp"
#include "thermoforge/thermo.hpp"
#include "thermoforge/workblocks.hpp"

namespace thermoforge::testing {

inline double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

inline Matrix diag2(double a, double b) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

inline Matrix ket_bra(int d, int i, int j) {
  Matrix m = Matrix::Zero(d, d);
  m(i, j) = 1.0;
  return m;
}

/// Replaces every input by the Gibbs state of h.
inline QuantumChannel thermalizer(const Matrix& h, double beta) {
  const int d = static_cast<int>(h.rows());
  return QuantumChannel::preparation(GibbsContext(h, beta).gibbs_state(), {d}, {d});
}

/// Kraus {|0><0|, |1><1|}.
inline QuantumChannel energy_dephasing() {
  return QuantumChannel::from_kraus({ket_bra(2, 0, 0), ket_bra(2, 1, 1)}, {2}, {2});
}

/// Qubit relaxation toward the Gibbs state of diag(0, eps) with strength p.
inline QuantumChannel relaxation(double eps, double beta, double p) {
  const double q = std::exp(-beta * eps) / (1.0 + std::exp(-beta * eps));  // excited population
  std::vector<Matrix> k;
  Matrix k0 = Matrix::Zero(2, 2);
  k0(0, 0) = std::sqrt(1.0 - p * q);
  k0(1, 1) = std::sqrt(1.0 - p * (1.0 - q));
  k.push_back(k0);
  k.push_back(std::sqrt(p * (1.0 - q)) * ket_bra(2, 0, 1));
  k.push_back(std::sqrt(p * q) * ket_bra(2, 1, 0));
  return QuantumChannel::from_kraus(k, {2}, {2});
}

/// gamma_E tr_E on E (x) X qubits with trivial Hamiltonians.
inline QuantumChannel conditional_reset() {
  std::vector<Matrix> k;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      Matrix m = Matrix::Zero(4, 4);
      for (int x = 0; x < 2; ++x) m(a * 2 + x, b * 2 + x) = 1.0 / std::sqrt(2.0);
      k.push_back(m);
    }
  return QuantumChannel::from_kraus(k, {4}, {4});
}

/// (|00><00| + |11><11|) / 2 on E (x) X.
inline Matrix classically_correlated() {
  Matrix m = Matrix::Zero(4, 4);
  m(0, 0) = 0.5;
  m(3, 3) = 0.5;
  return m;
}

/// Averages rho over permutations of its n sites of dimension d, then pinches
/// by the total-energy blocks of h_site. The result is permutation-invariant
/// and time-covariant.
inline Matrix symmetrize_and_pinch(const Matrix& rho, const Matrix& h_site, int n) {
  const int d = static_cast<int>(h_site.rows());
  const auto perms = all_permutations(n);
  Matrix sym = Matrix::Zero(rho.rows(), rho.cols());
  for (const auto& p : perms) {
    const Matrix op = permutation_operator(p, d).to_dense();
    sym += op * rho * op.adjoint();
  }
  sym /= static_cast<double>(perms.size());
  Matrix out = Matrix::Zero(rho.rows(), rho.cols());
  for (const Matrix& p : energy_blocks(h_site, n).projectors) out += p * sym * p;
  return hermitize(out);
}

inline Indices all_sites(int count) {
  Indices on(count);
  for (int i = 0; i < count; ++i) on[i] = i;
  return on;
}

}  // namespace thermoforge::testing
