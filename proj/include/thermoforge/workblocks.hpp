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

/// \file workblocks.hpp
/// \brief Work-value measurements built from Schur-Weyl blocks and global
/// energy blocks, and the dephasing they induce.
///
/// Work values are per copy, in energy units. For a block with total energy
/// E and Young diagram lambda the free-energy estimate is
/// F(E, lambda) = E / n - S(lambda / n) / beta, and a work value is always
/// "estimate on the output side minus estimate on the input side". For the
/// erasure measurement on (EX)^n the output side is X^n and the input side
/// is the joint system, so w estimates the erasure work
/// [D(rho_X || Gamma_X) - D(rho_EX || Gamma_EX)] / beta.
///
/// Layout conventions: (EX)^n spaces are interleaved, E_1 X_1 E_2 X_2 ...;
/// Choi matrices of n-fold maps are ordered X^n (x) R^n.

#include <vector>

#include "thermoforge/covariant.hpp"
#include "thermoforge/qcore.hpp"

namespace thermoforge {

/// Eigenprojectors of H_site (x) I + ... + I (x) H_site, built from the
/// single-site spectrum.
struct EnergyBlockFamily {
  std::vector<double> energies;  ///< Ascending cluster representatives.
  std::vector<Matrix> projectors;
  Dims dims;
};
EnergyBlockFamily energy_blocks(const Matrix& h_site, int n, double tol = 1e-9);

struct WorkValuePOVM {
  enum class Kind { kProjective, kGeneral };

  Kind kind = Kind::kProjective;
  std::vector<double> values;  ///< Ascending work values.
  std::vector<Matrix> elements;
  Dims dims;
  /// General kind: index of the element supported on the kernel of the
  /// joint Gibbs operator (formally w = -infinity), or -1.
  int null_element = -1;

  int size() const { return static_cast<int>(values.size()); }
  /// Max-abs deviation of sum P (projective) or sum M^dagger M (general)
  /// from the identity.
  double completeness_error() const;
  /// Projective kind: max-abs error of P_v P_w = delta_vw P_w.
  double projector_error() const;
  /// Sum of the elements with value <= threshold.
  Matrix at_most(double threshold) const;
};

/// Quantizes raw values: sorted values closer than tol are merged (single
/// linkage) and represented by their mean. Returns representatives and the
/// cluster index of each input.
std::pair<std::vector<double>, std::vector<int>> quantize_work_values(
    const std::vector<double>& raw, double tol);

/// Projective erasure measurement on (EX)^n for H_EX = H_E + H_X. Every
/// factor pair is checked to commute; throws std::logic_error otherwise.
WorkValuePOVM work_value_povm_EX(const Matrix& h_e, const Matrix& h_x, int n, double beta,
                                 double tol_w = 1e-9);

/// Same measurement assembled literally as sums of products
/// S Pi^mu Pi^lambda R from a single-site joint Hamiltonian h_ex on E (x) X.
/// Throws std::logic_error if the factors fail to commute (interacting h_ex).
WorkValuePOVM work_value_povm_EX_reference(const Matrix& h_ex, int d_e, const Matrix& h_x,
                                           int n, double beta, double tol_w = 1e-9);

/// Input-output measurement on X^n (x) R^n:
/// sum (S Pi^mu)_{X^n} (x) (S Pi^lambda)^T_{R^n}.
WorkValuePOVM work_value_povm_inout(const Matrix& h_x, int n, double beta, double tol_w = 1e-9);

/// sum_w (P_w on `on`) rho (P_w on `on`)^dagger, identity elsewhere.
Matrix dephase_W(const Matrix& rho, const Dims& dims, const Indices& on,
                 const WorkValuePOVM& povm);
/// Pure-state branches (P_w on `on`) psi, one per element.
std::vector<Vector> dephase_W_branches(const Vector& psi, const Dims& dims, const Indices& on,
                                       const WorkValuePOVM& povm);

struct DephasedChannel {
  QuantumChannel base;  ///< E^{(x)n}.
  Matrix choi_dephased;
  int num_work_values = 0;
  double cp_error = 0.0;  ///< max(0, -min eigenvalue of the Choi matrix).
  double tp_error = 0.0;  ///< max-abs deviation of tr_X from the identity.

  QuantumChannel channel() const;
};

DephasedChannel dephased_channel(const QuantumChannel& channel, const Matrix& h_x, int n,
                                 double beta, double tol_w = 1e-9);

/// Choi matrix (X^n (x) R^n) of tr_{E^n} D^W(V^{(x)n} (.) V^{(x)n dagger})
/// for an energy-conserving dilation.
Matrix stinespring_dephased_choi(const CovariantDilation& dilation, int n, double beta,
                                 double tol_w = 1e-9);

struct EquivalenceReport {
  double max_deviation = 0.0;  ///< Trace distance of normalized Choi states.
  int env_dim = 0;
  int num_work_values = 0;
};

/// Builds the dephased channel via Choi pinching and via dilation plus D^W.
/// Throws std::invalid_argument if the channel is not time-covariant.
EquivalenceReport stinespring_dephasing_equivalence(const QuantumChannel& channel,
                                                    const Matrix& h_x, int n, double beta,
                                                    double tol_w = 1e-9);

/// Work-value operators for a general isometry V: X -> E (x) X'.
/// Blocks come from Gamma_{X'}^{(x)n} and (V Gamma_X V^dagger)^{(x)n}.
WorkValuePOVM work_value_operators_gpm(const Matrix& v, int d_e, const Matrix& h_x,
                                       const Matrix& h_xp, int n, double beta,
                                       double tol_w = 1e-9);

struct WorkCostCovariance {
  bool covariant = false;
  double deviation = 0.0;  ///< Trace distance of normalized Choi states.
};
WorkCostCovariance is_work_cost_covariant(const QuantumChannel& channel, const Matrix& h_x,
                                          int n, double beta, double tol_w = 1e-9);

/// Dims {d_e, d_x, d_e, d_x, ...} of the interleaved (EX)^n space.
Dims interleaved_dims(int d_e, int d_x, int n);
/// Indices of the X factors inside interleaved_dims.
Indices x_sites(int n);
Indices e_sites(int n);

}  // namespace thermoforge
