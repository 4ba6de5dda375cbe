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

// Time-covariance tests and energy-conserving Stinespring dilations.

#include <vector>

#include "thermoforge/qcore.hpp"

namespace thermoforge {

struct CovarianceReport {
  bool covariant = false;
  double deviation = 0.0;
};

/// Frobenius norm of [J, H (x) I - I (x) H^T]; covariant below 1e-8.
CovarianceReport is_time_covariant(const QuantumChannel& channel, const Matrix& h,
                                   double threshold = 1e-8);

/// Cross-check: max over the given times of the Frobenius distance between
/// the Choi matrix and its conjugation by exp(-iHt) (x) exp(-iHt)^*.
double sampled_time_covariance_deviation(const QuantumChannel& channel, const Matrix& h,
                                         const std::vector<double>& times);

struct CovariantDilation {
  /// X -> E (x) X, environment first.
  Matrix v;
  /// Diagonal environment Hamiltonian; entry 0 is the dedicated |0>_E.
  RealVector h_env;
  int zero_level_index = 0;
  /// Energy moved onto X by each Kraus operator (environment slots 1..r).
  std::vector<double> transfers;
  Matrix h_sys;

  int env_dim() const { return static_cast<int>(h_env.size()); }
  int sys_dim() const { return static_cast<int>(h_sys.rows()); }
  Matrix env_hamiltonian() const { return h_env.cast<cplx>().asDiagonal(); }
  /// H_E (x) I + I (x) H_X.
  Matrix total_hamiltonian() const;
  /// Kraus operator for environment slot a.
  Matrix kraus(int a) const;
  QuantumChannel channel() const;
  /// max |(H_E + H_X) V - V H_X|.
  double energy_conservation_error() const;
};

/// Joint eigendecomposition of the Choi matrix and the covariance generator,
/// one Kraus operator per eigenvector with Choi eigenvalue above 1e-12
/// (relative). Throws if the channel is not time-covariant.
CovariantDilation covariant_dilation(const QuantumChannel& channel, const Matrix& h,
                                     double omega_tol = 1e-9);

/// Unitary U on E (x) X with U(|0> (x) psi) = V psi and [U, H_E + H_X] = 0,
/// completed independently inside each total-energy eigenspace.
Matrix extend_to_unitary(const CovariantDilation& dilation, double tol = 1e-9);

}  // namespace thermoforge
