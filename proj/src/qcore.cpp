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

#include "thermoforge/qcore.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "thermoforge/kernels.hpp"

namespace thermoforge {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

void check_square(const Matrix& m, const Dims& dims, const char* who) {
  require(m.rows() == m.cols(), std::string(who) + ": matrix is not square");
  require(total_dim(dims) == m.rows(), std::string(who) + ": dims do not match matrix size");
}

// Moves the subsystems in `on` to the front, keeping the rest in order.
Indices front_order(const Dims& dims, const Indices& on) {
  const int k = static_cast<int>(dims.size());
  std::vector<bool> used(k, false);
  Indices order;
  for (int i : on) {
    require(i >= 0 && i < k, "subsystem index out of range");
    require(!used[i], "duplicate subsystem index");
    used[i] = true;
    order.push_back(i);
  }
  for (int i = 0; i < k; ++i)
    if (!used[i]) order.push_back(i);
  return order;
}

Indices inverse_order(const Indices& order) {
  Indices inv(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) inv[order[i]] = static_cast<int>(i);
  return inv;
}

int product_of(const Dims& dims, const Indices& idx) {
  int p = 1;
  for (int i : idx) p *= dims[i];
  return p;
}

}  // namespace

int total_dim(const Dims& dims) {
  int p = 1;
  for (int d : dims) {
    require(d > 0, "subsystem dimensions must be positive");
    p *= d;
  }
  return p;
}

Matrix hermitize(const Matrix& a) { return 0.5 * (a + a.adjoint()); }

EigenSystem eigh(const Matrix& hermitian) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitize(hermitian));
  if (solver.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

double min_eigenvalue(const Matrix& hermitian) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitize(hermitian), Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

double max_eigenvalue(const Matrix& hermitian) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitize(hermitian), Eigen::EigenvaluesOnly);
  return solver.eigenvalues().maxCoeff();
}

Matrix tensor(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Vector tensor(const Vector& a, const Vector& b) {
  Vector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

Matrix tensor_power(const Matrix& a, int n) {
  require(n >= 0, "negative tensor power");
  Matrix out = Matrix::Identity(1, 1);
  for (int i = 0; i < n; ++i) out = tensor(out, a);
  return out;
}

Vector tensor_power(const Vector& a, int n) {
  require(n >= 0, "negative tensor power");
  Vector out = Vector::Ones(1);
  for (int i = 0; i < n; ++i) out = tensor(out, a);
  return out;
}

Dims permuted_dims(const Dims& dims, const Indices& order) {
  require(order.size() == dims.size(), "order size mismatch");
  Dims out(dims.size());
  for (std::size_t i = 0; i < order.size(); ++i) out[i] = dims.at(order[i]);
  return out;
}

Matrix permute_subsystems(const Matrix& op, const Dims& dims, const Indices& order) {
  check_square(op, dims, "permute_subsystems");
  return kernels::gather(op, kernels::subsystem_index_map(dims, order));
}

Vector permute_subsystems(const Vector& v, const Dims& dims, const Indices& order) {
  require(total_dim(dims) == v.size(), "permute_subsystems: dims do not match vector size");
  const std::vector<int> map = kernels::subsystem_index_map(dims, order);
  Vector out(v.size());
  for (std::size_t r = 0; r < map.size(); ++r) out(r) = v(map[r]);
  return out;
}

Matrix partial_trace(const Matrix& op, const Dims& dims, const Indices& keep) {
  check_square(op, dims, "partial_trace");
  Indices sorted_keep = keep;
  std::sort(sorted_keep.begin(), sorted_keep.end());
  const Indices order = front_order(dims, sorted_keep);
  const Matrix p = permute_subsystems(op, dims, order);
  const int kept = product_of(dims, sorted_keep);
  const int traced = static_cast<int>(op.rows()) / kept;
  Matrix out = Matrix::Zero(kept, kept);
  for (int j = 0; j < kept; ++j)
    for (int i = 0; i < kept; ++i) {
      cplx s = 0.0;
      for (int t = 0; t < traced; ++t) s += p(i * traced + t, j * traced + t);
      out(i, j) = s;
    }
  return out;
}

Matrix embed(const Matrix& op, const Dims& dims, const Indices& on) {
  const Indices order = front_order(dims, on);
  const int acted = product_of(dims, on);
  require(op.rows() == acted && op.cols() == acted, "embed: operator size mismatch");
  const int rest = total_dim(dims) / acted;
  const Matrix front = tensor(op, Matrix::Identity(rest, rest));
  return permute_subsystems(front, permuted_dims(dims, order), inverse_order(order));
}

double fidelity(const Matrix& rho, const Matrix& sigma) {
  require(rho.rows() == sigma.rows() && rho.cols() == sigma.cols(), "fidelity: size mismatch");
  const Matrix s = spectral_apply(rho, [](double x) { return std::sqrt(std::max(x, 0.0)); });
  const EigenSystem es = eigh(s * sigma * s);
  double root = 0.0;
  for (int i = 0; i < es.values.size(); ++i) root += std::sqrt(std::max(es.values(i), 0.0));
  return std::clamp(root * root, 0.0, 1.0);
}

double trace_norm(const Matrix& a) {
  Eigen::BDCSVD<Matrix> svd(a);
  return svd.singularValues().sum();
}

double trace_distance(const Matrix& a, const Matrix& b) { return 0.5 * trace_norm(a - b); }

double von_neumann_entropy(const Matrix& rho) {
  const EigenSystem es = eigh(rho);
  const double top = std::max(es.values.maxCoeff(), 0.0);
  double s = 0.0;
  for (int i = 0; i < es.values.size(); ++i) {
    const double p = es.values(i);
    if (p > kRankCutoff * top) s -= p * std::log(p);
  }
  return s;
}

// ---------------------------------------------------------------------------
// DensityOperator / PureState / Isometry

DensityOperator::DensityOperator(const Matrix& matrix, Dims dims) : dims_(std::move(dims)) {
  check_square(matrix, dims_, "DensityOperator");
  const double asym = (matrix - matrix.adjoint()).cwiseAbs().maxCoeff();
  require(asym <= kHermitianTol, "DensityOperator: matrix is not Hermitian");
  matrix_ = hermitize(matrix);
  require(std::abs(matrix_.trace().real() - 1.0) <= kTraceTol, "DensityOperator: trace is not 1");
  require(min_eigenvalue(matrix_) >= -kHermitianTol, "DensityOperator: matrix is not PSD");
}

DensityOperator::DensityOperator(const Matrix& matrix)
    : DensityOperator(matrix, Dims{static_cast<int>(matrix.rows())}) {}

DensityOperator DensityOperator::from_pure(const Vector& psi, Dims dims) {
  return PureState(psi, std::move(dims)).density();
}

DensityOperator DensityOperator::maximally_mixed(Dims dims) {
  const int d = total_dim(dims);
  return DensityOperator(Matrix::Identity(d, d) / static_cast<double>(d), std::move(dims));
}

DensityOperator DensityOperator::partial_trace(const Indices& keep) const {
  Indices sorted_keep = keep;
  std::sort(sorted_keep.begin(), sorted_keep.end());
  Dims kept;
  for (int i : sorted_keep) kept.push_back(dims_.at(i));
  return DensityOperator(thermoforge::partial_trace(matrix_, dims_, sorted_keep), kept);
}

DensityOperator DensityOperator::tensor(const DensityOperator& other) const {
  Dims d = dims_;
  d.insert(d.end(), other.dims_.begin(), other.dims_.end());
  return DensityOperator(thermoforge::tensor(matrix_, other.matrix_), d);
}

DensityOperator DensityOperator::tensor_power(int n) const {
  Dims d;
  for (int i = 0; i < n; ++i) d.insert(d.end(), dims_.begin(), dims_.end());
  return DensityOperator(thermoforge::tensor_power(matrix_, n), d);
}

RealVector DensityOperator::spectrum() const { return eigh(matrix_).values; }

PureState::PureState(const Vector& vector, Dims dims) : vector_(vector), dims_(std::move(dims)) {
  require(total_dim(dims_) == vector.size(), "PureState: dims do not match vector size");
  require(std::abs(vector.norm() - 1.0) <= 1e-12, "PureState: vector is not normalized");
}

DensityOperator PureState::density() const {
  return DensityOperator(vector_ * vector_.adjoint(), dims_);
}

Isometry::Isometry(const Matrix& matrix, Dims dims_in, Dims dims_out)
    : matrix_(matrix), dims_in_(std::move(dims_in)), dims_out_(std::move(dims_out)) {
  require(matrix.cols() == total_dim(dims_in_), "Isometry: input dims mismatch");
  require(matrix.rows() == total_dim(dims_out_), "Isometry: output dims mismatch");
  const Matrix gram = matrix.adjoint() * matrix;
  const double err = (gram - Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
  require(err <= kHermitianTol, "Isometry: V^dagger V is not the identity");
}

// ---------------------------------------------------------------------------
// QuantumChannel

QuantumChannel::QuantumChannel(Matrix choi, Dims dims_in, Dims dims_out)
    : choi_(std::move(choi)), dims_in_(std::move(dims_in)), dims_out_(std::move(dims_out)) {}

QuantumChannel QuantumChannel::from_choi(const Matrix& choi, Dims dims_in, Dims dims_out,
                                         Normalization norm) {
  const int din = total_dim(dims_in);
  const int dout = total_dim(dims_out);
  require(choi.rows() == din * dout && choi.cols() == din * dout,
          "QuantumChannel: Choi size does not match dims");
  const double asym = (choi - choi.adjoint()).cwiseAbs().maxCoeff();
  require(asym <= 1e-9, "QuantumChannel: Choi matrix is not Hermitian");
  Matrix j = hermitize(choi);
  const double top = std::max(1.0, max_eigenvalue(j));
  require(min_eigenvalue(j) >= -kHermitianTol * top, "QuantumChannel: Choi matrix is not PSD");
  const Matrix marginal = partial_trace(j, {dout, din}, {1});
  const Matrix id = Matrix::Identity(din, din);
  if (norm == Normalization::kTracePreserving) {
    require((marginal - id).cwiseAbs().maxCoeff() <= 1e-9,
            "QuantumChannel: map is not trace preserving");
  } else {
    require(max_eigenvalue(marginal - id) <= 1e-9, "QuantumChannel: map increases trace");
  }
  return QuantumChannel(std::move(j), std::move(dims_in), std::move(dims_out));
}

QuantumChannel QuantumChannel::from_kraus(const std::vector<Matrix>& kraus, Dims dims_in,
                                          Dims dims_out, Normalization norm) {
  require(!kraus.empty(), "QuantumChannel: empty Kraus family");
  const int din = total_dim(dims_in);
  const int dout = total_dim(dims_out);
  for (const Matrix& k : kraus)
    require(k.rows() == dout && k.cols() == din, "QuantumChannel: Kraus operator size mismatch");
  return from_choi(choi_from_kraus(kraus, din), std::move(dims_in), std::move(dims_out), norm);
}

QuantumChannel QuantumChannel::identity(Dims dims) {
  const int d = total_dim(dims);
  return from_kraus({Matrix::Identity(d, d)}, dims, dims);
}

QuantumChannel QuantumChannel::preparation(const Matrix& sigma, Dims dims_in, Dims dims_out) {
  const int din = total_dim(dims_in);
  return from_choi(tensor(sigma, Matrix::Identity(din, din)), std::move(dims_in),
                   std::move(dims_out));
}

QuantumChannel QuantumChannel::unitary(const Matrix& u, Dims dims) {
  return from_kraus({u}, dims, dims);
}

Matrix QuantumChannel::operator()(const Matrix& rho) const {
  Indices all(dims_in_.size());
  std::iota(all.begin(), all.end(), 0);
  if (dims_in_.size() == dims_out_.size()) return apply_channel(*this, rho, dims_in_, all);
  // Factor counts differ: treat input and output as single blocks.
  QuantumChannel flat(choi_, {dim_in()}, {dim_out()});
  return apply_channel(flat, rho, {dim_in()}, {0});
}

QuantumChannel QuantumChannel::tensor_power(int n) const {
  require(n >= 1, "tensor_power: n must be positive");
  const int ko = static_cast<int>(dims_out_.size());
  const int ki = static_cast<int>(dims_in_.size());
  Dims copy_dims = dims_out_;
  copy_dims.insert(copy_dims.end(), dims_in_.begin(), dims_in_.end());
  Dims all_dims;
  for (int c = 0; c < n; ++c) all_dims.insert(all_dims.end(), copy_dims.begin(), copy_dims.end());
  Indices order;
  for (int c = 0; c < n; ++c)
    for (int f = 0; f < ko; ++f) order.push_back(c * (ko + ki) + f);
  for (int c = 0; c < n; ++c)
    for (int f = 0; f < ki; ++f) order.push_back(c * (ko + ki) + ko + f);
  Matrix j = permute_subsystems(thermoforge::tensor_power(choi_, n), all_dims, order);
  Dims in_n, out_n;
  for (int c = 0; c < n; ++c) {
    out_n.insert(out_n.end(), dims_out_.begin(), dims_out_.end());
    in_n.insert(in_n.end(), dims_in_.begin(), dims_in_.end());
  }
  return QuantumChannel(std::move(j), std::move(in_n), std::move(out_n));
}

Matrix choi_from_kraus(const std::vector<Matrix>& kraus, int dim_in) {
  require(!kraus.empty(), "choi_from_kraus: empty family");
  const int dout = static_cast<int>(kraus.front().rows());
  Matrix j = Matrix::Zero(dout * dim_in, dout * dim_in);
  for (const Matrix& k : kraus) {
    Vector v(dout * dim_in);
    for (int o = 0; o < dout; ++o)
      for (int i = 0; i < dim_in; ++i) v(o * dim_in + i) = k(o, i);
    j.noalias() += v * v.adjoint();
  }
  return j;
}

ChannelViews channel_views(const QuantumChannel& channel) {
  const int din = channel.dim_in();
  const int dout = channel.dim_out();
  const EigenSystem es = eigh(channel.choi());
  const double top = es.values.maxCoeff();
  require(es.values.minCoeff() >= -kHermitianTol * std::max(1.0, top),
          "channel_views: Choi matrix is not PSD");
  std::vector<Matrix> kraus;
  for (int a = static_cast<int>(es.values.size()) - 1; a >= 0; --a) {
    const double p = es.values(a);
    if (p <= kRankCutoff * top) continue;
    Matrix k(dout, din);
    for (int o = 0; o < dout; ++o)
      for (int i = 0; i < din; ++i) k(o, i) = std::sqrt(p) * es.vectors(o * din + i, a);
    kraus.push_back(std::move(k));
  }
  const int r = static_cast<int>(kraus.size());
  Matrix v(r * dout, din);
  for (int a = 0; a < r; ++a) v.block(a * dout, 0, dout, din) = kraus[a];
  // Re-orthonormalize against rounding so that the Isometry invariant holds.
  const EigenSystem gram = eigh(v.adjoint() * v);
  const Matrix inv_sqrt =
      gram.vectors * gram.values.cwiseSqrt().cwiseInverse().asDiagonal() * gram.vectors.adjoint();
  Matrix v_iso = v * inv_sqrt;
  Dims out_dims{r};
  out_dims.insert(out_dims.end(), channel.dims_out().begin(), channel.dims_out().end());
  return {std::move(kraus), Isometry(v_iso, channel.dims_in(), out_dims)};
}

Matrix apply_channel(const QuantumChannel& channel, const Matrix& rho, const Dims& dims,
                     const Indices& on) {
  check_square(rho, dims, "apply_channel");
  require(on.size() == channel.dims_in().size(), "apply_channel: factor count mismatch");
  require(channel.dims_in().size() == channel.dims_out().size(),
          "apply_channel: channel must map factors one to one");
  for (std::size_t i = 0; i < on.size(); ++i)
    require(dims.at(on[i]) == channel.dims_in()[i], "apply_channel: dimension mismatch");
  const Indices order = front_order(dims, on);
  const Matrix p = permute_subsystems(rho, dims, order);
  const int din = channel.dim_in();
  const int dout = channel.dim_out();
  const int db = static_cast<int>(rho.rows()) / din;
  // Reshuffle rho into Y[(i,j),(b,b')] and J into S[(o,o'),(i,j)].
  Matrix y(din * din, db * db);
  for (int i = 0; i < din; ++i)
    for (int j = 0; j < din; ++j)
      for (int b = 0; b < db; ++b)
        for (int bp = 0; bp < db; ++bp) y(i * din + j, b * db + bp) = p(i * db + b, j * db + bp);
  const Matrix& jm = channel.choi();
  Matrix s(dout * dout, din * din);
  for (int o = 0; o < dout; ++o)
    for (int op = 0; op < dout; ++op)
      for (int i = 0; i < din; ++i)
        for (int j = 0; j < din; ++j) s(o * dout + op, i * din + j) = jm(o * din + i, op * din + j);
  const Matrix z = s * y;
  Matrix out(dout * db, dout * db);
  for (int o = 0; o < dout; ++o)
    for (int op = 0; op < dout; ++op)
      for (int b = 0; b < db; ++b)
        for (int bp = 0; bp < db; ++bp) out(o * db + b, op * db + bp) = z(o * dout + op, b * db + bp);
  Dims new_dims = dims;
  for (std::size_t i = 0; i < on.size(); ++i) new_dims[on[i]] = channel.dims_out()[i];
  return permute_subsystems(out, permuted_dims(new_dims, order), inverse_order(order));
}

Matrix apply_kraus(const std::vector<Matrix>& kraus, const Matrix& rho, const Dims& dims,
                   const Indices& on) {
  check_square(rho, dims, "apply_kraus");
  require(!kraus.empty(), "apply_kraus: empty family");
  const Indices order = front_order(dims, on);
  const Matrix p = permute_subsystems(rho, dims, order);
  const int din = product_of(dims, on);
  require(kraus.front().cols() == din, "apply_kraus: input dimension mismatch");
  const int dout = static_cast<int>(kraus.front().rows());
  const int db = static_cast<int>(rho.rows()) / din;
  const Matrix id = Matrix::Identity(db, db);
  Matrix out = Matrix::Zero(dout * db, dout * db);
  for (const Matrix& k : kraus) {
    const Matrix kk = tensor(k, id);
    out.noalias() += kk * p * kk.adjoint();
  }
  require(on.size() == 1 || dout == din, "apply_kraus: output factors are ambiguous");
  Dims new_dims = dims;
  if (on.size() == 1) new_dims[on[0]] = dout;
  return permute_subsystems(out, permuted_dims(new_dims, order), inverse_order(order));
}

DensityOperator apply_channel(const QuantumChannel& channel, const DensityOperator& rho,
                              const Indices& on) {
  Dims new_dims = rho.dims();
  for (std::size_t i = 0; i < on.size(); ++i) new_dims.at(on[i]) = channel.dims_out().at(i);
  return DensityOperator(hermitize(apply_channel(channel, rho.matrix(), rho.dims(), on)),
                         new_dims);
}

Vector max_entangled(int d) {
  Vector v = Vector::Zero(d * d);
  for (int j = 0; j < d; ++j) v(j * d + j) = 1.0;
  return v;
}

}  // namespace thermoforge
