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

#include "thermoforge/covariant.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace thermoforge {

namespace {

Matrix generator(const Matrix& h) {
  const int d = static_cast<int>(h.rows());
  const Matrix id = Matrix::Identity(d, d);
  return tensor(h, id) - tensor(id, Matrix(h.transpose()));
}

// Groups sorted values into clusters whose neighbours differ by <= tol.
std::vector<std::vector<int>> cluster_sorted(const std::vector<std::pair<double, int>>& items,
                                             double tol) {
  std::vector<std::vector<int>> groups;
  double last = 0.0;
  for (const auto& [value, idx] : items) {
    if (groups.empty() || value - last > tol) groups.emplace_back();
    groups.back().push_back(idx);
    last = value;
  }
  return groups;
}

// Orthonormal basis of range(P) orthogonal to the columns of `taken`.
Matrix complement_in(const Matrix& block_basis, const Matrix& taken) {
  const int k = static_cast<int>(block_basis.cols());
  const int m = static_cast<int>(taken.cols());
  if (k == m) return Matrix(block_basis.rows(), 0);
  Matrix residual = block_basis * block_basis.adjoint();
  if (m > 0) residual -= taken * taken.adjoint();
  const EigenSystem es = eigh(residual);
  // Eigenvalues are ~0 or ~1; the top k - m columns span the complement.
  return es.vectors.rightCols(k - m);
}

}  // namespace

CovarianceReport is_time_covariant(const QuantumChannel& channel, const Matrix& h,
                                   double threshold) {
  if (channel.dim_in() != h.rows() || channel.dim_out() != h.rows())
    throw std::invalid_argument("is_time_covariant: Hamiltonian size mismatch");
  const Matrix g = generator(h);
  const Matrix& j = channel.choi();
  const double dev = (j * g - g * j).norm();
  return {dev <= threshold, dev};
}

double sampled_time_covariance_deviation(const QuantumChannel& channel, const Matrix& h,
                                         const std::vector<double>& times) {
  const EigenSystem es = eigh(h);
  double worst = 0.0;
  for (double t : times) {
    Vector phases(es.values.size());
    for (int i = 0; i < es.values.size(); ++i) phases(i) = std::exp(cplx(0.0, -es.values(i) * t));
    const Matrix u = es.vectors * phases.asDiagonal() * es.vectors.adjoint();
    const Matrix w = tensor(u, Matrix(u.conjugate()));
    worst = std::max(worst, (w * channel.choi() * w.adjoint() - channel.choi()).norm());
  }
  return worst;
}

Matrix CovariantDilation::total_hamiltonian() const {
  const int de = env_dim();
  const int dx = sys_dim();
  return tensor(env_hamiltonian(), Matrix::Identity(dx, dx)) +
         tensor(Matrix::Identity(de, de), h_sys);
}

Matrix CovariantDilation::kraus(int a) const {
  const int dx = sys_dim();
  return v.block(a * dx, 0, dx, dx);
}

QuantumChannel CovariantDilation::channel() const {
  std::vector<Matrix> ks;
  for (int a = 0; a < env_dim(); ++a) ks.push_back(kraus(a));
  return QuantumChannel::from_kraus(ks, {sys_dim()}, {sys_dim()});
}

double CovariantDilation::energy_conservation_error() const {
  return (total_hamiltonian() * v - v * h_sys).cwiseAbs().maxCoeff();
}

CovariantDilation covariant_dilation(const QuantumChannel& channel, const Matrix& h,
                                     double omega_tol) {
  const CovarianceReport cov = is_time_covariant(channel, h);
  if (!cov.covariant)
    throw std::invalid_argument("covariant_dilation: channel is not time-covariant");
  const int d = static_cast<int>(h.rows());
  const EigenSystem es = eigh(h);

  // Eigenvectors of the generator: |e_i> (x) |e_j>^* with value E_i - E_j.
  std::vector<std::pair<double, int>> modes;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) modes.push_back({es.values(i) - es.values(j), i * d + j});
  std::stable_sort(modes.begin(), modes.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });

  const Matrix& choi = channel.choi();
  const double top = std::max(max_eigenvalue(choi), 0.0);
  std::vector<Matrix> kraus;
  std::vector<double> transfers;
  for (const std::vector<int>& group : cluster_sorted(modes, omega_tol)) {
    Matrix basis(d * d, static_cast<int>(group.size()));
    double omega = 0.0;
    for (std::size_t c = 0; c < group.size(); ++c) {
      const int i = group[c] / d;
      const int j = group[c] % d;
      basis.col(c) = tensor(Vector(es.vectors.col(i)), Vector(es.vectors.col(j).conjugate()));
      omega += es.values(i) - es.values(j);
    }
    omega /= static_cast<double>(group.size());
    const EigenSystem block = eigh(basis.adjoint() * choi * basis);
    for (int a = static_cast<int>(block.values.size()) - 1; a >= 0; --a) {
      const double p = block.values(a);
      if (p <= kRankCutoff * top) continue;
      const Vector vec = basis * block.vectors.col(a);
      Matrix k(d, d);
      for (int o = 0; o < d; ++o)
        for (int i = 0; i < d; ++i) k(o, i) = std::sqrt(p) * vec(o * d + i);
      kraus.push_back(std::move(k));
      transfers.push_back(omega);
    }
  }

  const int r = static_cast<int>(kraus.size());
  CovariantDilation out;
  out.h_sys = hermitize(h);
  out.zero_level_index = 0;
  out.transfers = transfers;
  out.h_env = RealVector::Zero(r + 1);
  out.v = Matrix::Zero((r + 1) * d, d);
  for (int a = 0; a < r; ++a) {
    out.v.block((a + 1) * d, 0, d, d) = kraus[a];
    // Energy bookkeeping: the environment absorbs what the system gains.
    out.h_env(a + 1) = transfers[a] == 0.0 ? 0.0 : -transfers[a];
  }
  return out;
}

Matrix extend_to_unitary(const CovariantDilation& dil, double tol) {
  const int de = dil.env_dim();
  const int dx = dil.sys_dim();
  const EigenSystem hx = eigh(dil.h_sys);
  // Total-energy eigenbasis: |a> (x) |e_i> with energy h_a + E_i.
  std::vector<std::pair<double, int>> levels;
  for (int a = 0; a < de; ++a)
    for (int i = 0; i < dx; ++i) levels.push_back({dil.h_env(a) + hx.values(i), a * dx + i});
  std::stable_sort(levels.begin(), levels.end(),
                   [](const auto& x, const auto& y) { return x.first < y.first; });

  const int total = de * dx;
  Matrix u = Matrix::Zero(total, total);
  for (const std::vector<int>& group : cluster_sorted(levels, tol)) {
    const int k = static_cast<int>(group.size());
    Matrix block(total, k);
    std::vector<int> sys_levels;
    for (int c = 0; c < k; ++c) {
      const int a = group[c] / dx;
      const int i = group[c] % dx;
      Vector env = Vector::Zero(de);
      env(a) = 1.0;
      block.col(c) = tensor(env, Vector(hx.vectors.col(i)));
      if (a == dil.zero_level_index) sys_levels.push_back(i);
    }
    const int m = static_cast<int>(sys_levels.size());
    Matrix domain(total, m), image(total, m);
    for (int c = 0; c < m; ++c) {
      Vector env0 = Vector::Zero(de);
      env0(dil.zero_level_index) = 1.0;
      const Vector e = hx.vectors.col(sys_levels[c]);
      domain.col(c) = tensor(env0, e);
      image.col(c) = dil.v * e;
    }
    const Matrix dom_rest = complement_in(block, domain);
    const Matrix img_rest = complement_in(block, image);
    u += image * domain.adjoint() + img_rest * dom_rest.adjoint();
  }
  return u;
}

}  // namespace thermoforge
