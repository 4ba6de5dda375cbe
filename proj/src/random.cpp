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

#include "thermoforge/random.hpp"

#include <Eigen/QR>

#include <cmath>
#include <numbers>

namespace thermoforge {

double CounterRng::normal() {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Matrix ginibre(int rows, int cols, CounterRng& rng) {
  Matrix g(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) {
      const double re = rng.normal();
      const double im = rng.normal();
      g(i, j) = cplx(re, im) / std::sqrt(2.0);
    }
  return g;
}

Matrix haar_unitary(int d, CounterRng& rng) {
  const Matrix g = ginibre(d, d, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(d, d);
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < d; ++i) {
    const cplx diag = r(i, i);
    if (std::abs(diag) > 0) q.col(i) *= diag / std::abs(diag);
  }
  return q;
}

Matrix random_density(int d, CounterRng& rng) {
  const Matrix g = ginibre(d, d, rng);
  Matrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return hermitize(rho);
}

Vector random_pure(int d, CounterRng& rng) {
  Vector v = ginibre(d, 1, rng).col(0);
  return v / v.norm();
}

std::vector<Matrix> random_kraus(int d_in, int d_out, int kraus_rank, CounterRng& rng) {
  const int big = kraus_rank * d_out;
  const Matrix u = haar_unitary(big, rng);
  const Matrix v = u.leftCols(d_in);
  std::vector<Matrix> kraus;
  for (int a = 0; a < kraus_rank; ++a) kraus.push_back(v.block(a * d_out, 0, d_out, d_in));
  return kraus;
}

std::vector<Matrix> random_covariant_kraus(const Matrix& h, CounterRng& rng, double tol) {
  const EigenSystem es = eigh(h);
  const int d = static_cast<int>(h.rows());
  // Distinct transfer values E_i - E_j.
  std::vector<double> transfers;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      const double w = es.values(i) - es.values(j);
      bool seen = false;
      for (double t : transfers) seen = seen || std::abs(t - w) <= tol;
      if (!seen) transfers.push_back(w);
    }
  std::vector<Matrix> kraus;
  for (double w : transfers) {
    // One or two Kraus operators per transfer value, random weights.
    const int copies = 1 + static_cast<int>(rng.uniform() * 2.0);
    for (int c = 0; c < copies; ++c) {
      Matrix k = Matrix::Zero(d, d);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
          if (std::abs(es.values(i) - es.values(j) - w) <= tol) {
            const double re = rng.normal();
            const double im = rng.normal();
            k(i, j) = cplx(re, im);
          }
      kraus.push_back(es.vectors * k * es.vectors.adjoint());
    }
  }
  Matrix s = Matrix::Zero(d, d);
  for (const Matrix& k : kraus) s += k.adjoint() * k;
  const Matrix inv_sqrt = spectral_apply(s, [](double x) { return 1.0 / std::sqrt(x); });
  for (Matrix& k : kraus) k = k * inv_sqrt;
  return kraus;
}

}  // namespace thermoforge
