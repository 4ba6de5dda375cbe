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

/// \file qcore.hpp
/// \brief Dense quantum linear algebra: states, channels, tensor bookkeeping.
///
/// Operators on multipartite spaces carry an ordered list of subsystem
/// dimensions. Subsystem 0 is the most significant factor of the Kronecker
/// product, so the basis index of |i_0 i_1 ... i_{k-1}> is
/// ((i_0 d_1 + i_1) d_2 + ...) + i_{k-1}.

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <vector>

namespace thermoforge {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using Dims = std::vector<int>;
using Indices = std::vector<int>;

/// Tolerances shared by validation routines.
inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kTraceTol = 1e-10;
inline constexpr double kRankCutoff = 1e-12;

/// Product of all subsystem dimensions.
int total_dim(const Dims& dims);

/// Returns (A + A^dagger)/2.
Matrix hermitize(const Matrix& a);

/// Hermitian eigendecomposition with ascending eigenvalues.
struct EigenSystem {
  RealVector values;
  Matrix vectors;
};
EigenSystem eigh(const Matrix& hermitian);

/// Applies a real function to the spectrum of a Hermitian matrix.
template <typename F>
Matrix spectral_apply(const Matrix& hermitian, F f) {
  EigenSystem es = eigh(hermitian);
  RealVector fv(es.values.size());
  for (int i = 0; i < es.values.size(); ++i) fv(i) = f(es.values(i));
  return es.vectors * fv.asDiagonal() * es.vectors.adjoint();
}

double min_eigenvalue(const Matrix& hermitian);
double max_eigenvalue(const Matrix& hermitian);

/// Kronecker product.
Matrix tensor(const Matrix& a, const Matrix& b);
Vector tensor(const Vector& a, const Vector& b);
Matrix tensor_power(const Matrix& a, int n);
Vector tensor_power(const Vector& a, int n);

/// Reorders tensor factors. Position i of the result holds subsystem
/// order[i] of the input.
Matrix permute_subsystems(const Matrix& op, const Dims& dims, const Indices& order);
Vector permute_subsystems(const Vector& v, const Dims& dims, const Indices& order);
Dims permuted_dims(const Dims& dims, const Indices& order);

/// Traces out every subsystem not listed in `keep`; kept factors stay in
/// their original relative order.
Matrix partial_trace(const Matrix& op, const Dims& dims, const Indices& keep);

/// Embeds an operator acting on subsystems `on` (in that order) into the
/// full space, with identity elsewhere.
Matrix embed(const Matrix& op, const Dims& dims, const Indices& on);

/// Squared Uhlmann fidelity (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.
double fidelity(const Matrix& rho, const Matrix& sigma);
/// Sum of singular values.
double trace_norm(const Matrix& a);
/// One half of the trace norm of the difference.
double trace_distance(const Matrix& a, const Matrix& b);
/// von Neumann entropy in nats.
double von_neumann_entropy(const Matrix& rho);

class DensityOperator {
 public:
  /// Validates Hermiticity, positivity and unit trace; symmetrizes.
  DensityOperator(const Matrix& matrix, Dims dims);
  explicit DensityOperator(const Matrix& matrix);

  static DensityOperator from_pure(const Vector& psi, Dims dims);
  static DensityOperator maximally_mixed(Dims dims);

  const Matrix& matrix() const { return matrix_; }
  const Dims& dims() const { return dims_; }
  int dim() const { return static_cast<int>(matrix_.rows()); }

  DensityOperator partial_trace(const Indices& keep) const;
  DensityOperator tensor(const DensityOperator& other) const;
  DensityOperator tensor_power(int n) const;
  RealVector spectrum() const;

 private:
  Matrix matrix_;
  Dims dims_;
};

class PureState {
 public:
  PureState(const Vector& vector, Dims dims);

  const Vector& vector() const { return vector_; }
  const Dims& dims() const { return dims_; }
  DensityOperator density() const;

 private:
  Vector vector_;
  Dims dims_;
};

class Isometry {
 public:
  Isometry(const Matrix& matrix, Dims dims_in, Dims dims_out);

  const Matrix& matrix() const { return matrix_; }
  const Dims& dims_in() const { return dims_in_; }
  const Dims& dims_out() const { return dims_out_; }

 private:
  Matrix matrix_;
  Dims dims_in_;
  Dims dims_out_;
};

/// A completely positive map stored by its Choi matrix
/// J = sum_ij E(|i><j|) (x) |i><j| on out (x) in.
class QuantumChannel {
 public:
  enum class Normalization { kTracePreserving, kTraceNonIncreasing };

  static QuantumChannel from_choi(const Matrix& choi, Dims dims_in, Dims dims_out,
                                  Normalization norm = Normalization::kTracePreserving);
  static QuantumChannel from_kraus(const std::vector<Matrix>& kraus, Dims dims_in,
                                   Dims dims_out,
                                   Normalization norm = Normalization::kTracePreserving);
  static QuantumChannel identity(Dims dims);
  /// rho -> tr(rho) sigma.
  static QuantumChannel preparation(const Matrix& sigma, Dims dims_in, Dims dims_out);
  static QuantumChannel unitary(const Matrix& u, Dims dims);

  const Matrix& choi() const { return choi_; }
  const Dims& dims_in() const { return dims_in_; }
  const Dims& dims_out() const { return dims_out_; }
  int dim_in() const { return total_dim(dims_in_); }
  int dim_out() const { return total_dim(dims_out_); }

  /// Applies the channel to a full input operator.
  Matrix operator()(const Matrix& rho) const;

  /// E^{(x)n}, with the Choi matrix ordered out^n (x) in^n.
  QuantumChannel tensor_power(int n) const;

 private:
  QuantumChannel(Matrix choi, Dims dims_in, Dims dims_out);

  Matrix choi_;
  Dims dims_in_;
  Dims dims_out_;
};

struct ChannelViews {
  std::vector<Matrix> kraus;
  Isometry stinespring;  ///< X -> K (x) X_out with K the Kraus index.
};

/// Kraus operators from the Choi eigendecomposition (cutoff 1e-12 relative)
/// and the corresponding Stinespring isometry with the environment first.
ChannelViews channel_views(const QuantumChannel& channel);

/// Choi matrix of a Kraus family.
Matrix choi_from_kraus(const std::vector<Matrix>& kraus, int dim_in);

/// Applies E on subsystems `on` of rho via the Choi matrix. The channel's
/// input factors must match dims[on]; output factors replace them in place.
Matrix apply_channel(const QuantumChannel& channel, const Matrix& rho, const Dims& dims,
                     const Indices& on);
/// Same, via a Kraus family acting on the joint block `on`.
Matrix apply_kraus(const std::vector<Matrix>& kraus, const Matrix& rho, const Dims& dims,
                   const Indices& on);
DensityOperator apply_channel(const QuantumChannel& channel, const DensityOperator& rho,
                              const Indices& on);

/// Unnormalized maximally entangled vector sum_j |j>|j> of dimension d*d.
Vector max_entangled(int d);

}  // namespace thermoforge
