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

// Effective-channel simulations of the erasure and process protocols, with
// their work ledgers and statistical checks. Bath microdynamics are not
// modelled: each protocol is represented by the channel it is guaranteed to
// implement plus the battery charges it draws.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "thermoforge/qcore.hpp"
#include "thermoforge/symmetry.hpp"
#include "thermoforge/thermo.hpp"
#include "thermoforge/workblocks.hpp"

namespace thermoforge {

struct ProtocolParams {
  int n = 1;
  double delta = 0.05;  ///< Nats.
  double tol_w = 1e-9;
  std::uint64_t seed = 0;

  void validate() const;
};

struct WorkDistribution {
  std::vector<double> values;  ///< Ascending.
  std::vector<double> probabilities;

  double total() const;
  double mean() const;
  /// Largest value carrying probability above `cutoff`.
  double max_support(double cutoff = 1e-12) const;
  /// Probability of |w - center| <= radius.
  double mass_within(double center, double radius) const;
};

/// Outcome probabilities tr[M^dagger M rho] of a work-value POVM.
WorkDistribution work_distribution(const WorkValuePOVM& povm, const Matrix& rho);

struct DecayReport {
  std::vector<int> n;
  std::vector<double> values;
  /// Least-squares slope of log(value) against n; NaN if any value is zero
  /// or fewer than two points.
  double log_slope = std::numeric_limits<double>::quiet_NaN();
  /// Empirical decay rate, -log_slope.
  double rate = std::numeric_limits<double>::quiet_NaN();
  bool nonincreasing = true;
  bool strictly_decreasing = true;
  bool nondecreasing = true;
};
DecayReport make_decay_report(const std::vector<int>& n, const std::vector<double>& values);

// ---------------------------------------------------------------------------
// Free-energy estimation

struct EstimatorOutcome {
  YoungDiagram diagram;
  double energy = 0.0;  ///< Total energy of the block.
  double estimate = 0.0;
  double probability = 0.0;
};

/// Exact joint distribution of (Schur-Weyl block, total energy) on rho^{(x)n}.
std::vector<EstimatorOutcome> free_energy_outcomes(const Matrix& rho, const Matrix& h,
                                                   double beta, int n);

struct EstimatorStats {
  double mean = 0.0;     ///< Sample mean.
  double stddev = 0.0;   ///< Sample standard deviation.
  double exact_mean = 0.0;
  double target = 0.0;   ///< tr(H rho) - S(rho) / beta.
  std::vector<double> samples;
};
EstimatorStats free_energy_estimator(const Matrix& rho, const Matrix& h, double beta, int n,
                                     int samples, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Conditional erasure

/// Noninteracting E and X, n interleaved copies, and an optional trailing
/// reference system of dimension d_r.
struct ErasureSetup {
  Matrix h_e;
  Matrix h_x;
  double beta = 1.0;
  int n = 1;
  int d_r = 1;

  Dims dims() const;
  int d_e() const { return static_cast<int>(h_e.rows()); }
  int d_x() const { return static_cast<int>(h_x.rows()); }
};

/// Single-copy erasure rate [D(rho_X||Gamma_X) - D(rho_EX||Gamma_EX)] / beta + F_E.
double erasure_rate(const Matrix& rho_ex, const Matrix& h_e, const Matrix& h_x, double beta);

struct ErasureWorkReport {
  WorkDistribution distribution;
  double target = 0.0;
};
/// Work-value statistics of rho_EX^{(x)n} and the single-copy rate.
ErasureWorkReport erasure_work_distribution(const Matrix& rho_ex, const Matrix& h_e,
                                            const Matrix& h_x, double beta, int n,
                                            double tol_w = 1e-9);

/// gamma_E^{(x)n} placed on the E sites of `setup`, tensored with a state on
/// X^n (x) R given in that order.
Matrix attach_thermal_environment(const Matrix& rho_xr, const ErasureSetup& setup);
/// tr_{E^n} of an operator on setup.dims(), returned on X^n (x) R.
Matrix trace_environment(const Matrix& rho, const ErasureSetup& setup);

struct SemiuniversalResult {
  Matrix output;
  WorkLedger ledger;
  double accepted = 0.0;  ///< Weight captured by the threshold projector.
};
/// Deterministic-work erasure that is correct on inputs whose erasure work
/// does not exceed w0. Throws std::domain_error if nothing is captured.
SemiuniversalResult semiuniversal_erasure(const Matrix& rho, const ErasureSetup& setup,
                                          double w0, const ProtocolParams& params);

/// Captured weight of rho_EX^{(x)n} for each n.
DecayReport semiuniversal_acceptance(const Matrix& rho_ex, const Matrix& h_e, const Matrix& h_x,
                                     double beta, double w0, const ProtocolParams& params,
                                     const std::vector<int>& n_range);

struct VariableErasureResult {
  Matrix output;
  /// Measured work values (per copy) and their probabilities.
  WorkDistribution outcomes;
  /// Total battery charge for each outcome, outcome-independent entries included.
  WorkDistribution charges;
  WorkLedger ledger;  ///< Outcome-independent charges only.
  /// Trace distance and fidelity to gamma_E^{(x)n} (x) tr_E D^W(rho).
  double target_distance = 0.0;
  double target_fidelity = 0.0;
};
VariableErasureResult variable_work_erasure(const Matrix& rho, const ErasureSetup& setup,
                                            const ProtocolParams& params);

// ---------------------------------------------------------------------------
// Process implementation

struct VariableProcessResult {
  Matrix output;  ///< On X^n (x) R.
  /// Per-copy work values of the whole process and their probabilities.
  WorkDistribution outcomes;
  WorkLedger ledger;
  double expected_total_work = 0.0;
  /// Trace distance and fidelity to the work-cost-dephased channel's output.
  double dephased_distance = 0.0;
  double dephased_fidelity = 0.0;
  /// W[E; sigma] per copy when the input is i.i.d.
  std::optional<double> target;
};

/// Dilates a time-covariant channel, resets E^n, runs the variable-work
/// erasure on (EX)^n and discards E^n. sigma lives on X^n (x) R.
VariableProcessResult variable_work_process(const QuantumChannel& channel, const Matrix& h_x,
                                            const Matrix& sigma, int d_r, double beta,
                                            const ProtocolParams& params);
/// Same on sigma_1^{(x)n}, with the per-copy target filled in.
VariableProcessResult variable_work_process_iid(const QuantumChannel& channel,
                                                const Matrix& h_x, const Matrix& sigma_1,
                                                double beta, const ProtocolParams& params);

// ---------------------------------------------------------------------------
// Gibbs-preserving variable-work map

struct GpmReport {
  WorkValuePOVM operators;
  double completeness_error = 0.0;
  double max_operator_norm = 0.0;
  double max_non_hermiticity = 0.0;
  /// Slack (energy units, total over n copies) granted to the battery
  /// update, computed from block overlaps before the check.
  double slack = 0.0;
  /// Smallest slack for which the sub-preservation check would pass.
  double required_slack = 0.0;
  /// Smallest eigenvalue of Gamma_X'^n - e^{-beta slack} sum_w e^{-beta n w} T_w(Gamma_X^n).
  double gibbs_min_eigenvalue = 0.0;
  /// Max-abs deviation of tr of sum_w T_w from the identity map on a basis.
  double trace_preservation_error = 0.0;
  /// Choi matrix (X'^n (x) R^n) of sum_w tr_E T_w.
  Matrix choi;
};

/// Builds T_w(.) = M_w V^n (.) V^n dagger M_w^dagger for an isometry
/// V: X -> E (x) X' with environment first.
GpmReport gpm_variable_map(const Matrix& v, int d_e, const Matrix& h_x, const Matrix& h_xp,
                           int n, double beta, double tol_w = 1e-9);
/// Uses the energy-conserving dilation for time-covariant channels and the
/// Kraus dilation otherwise.
GpmReport gpm_variable_map(const QuantumChannel& channel, const Matrix& h_x, int n,
                           double beta, double tol_w = 1e-9);

/// Probability that the measured work value lies within delta / beta of
/// W[E; sigma], for sigma^{(x)n} over the given n.
DecayReport gpm_concentration(const QuantumChannel& channel, const Matrix& h_x,
                              const Matrix& sigma, double beta, const ProtocolParams& params,
                              const std::vector<int>& n_range);

// ---------------------------------------------------------------------------
// Hypothesis test behind the semiuniversal protocol

struct HypothesisTestReport {
  std::vector<int> n;
  std::vector<double> alpha;  ///< tr[P rho^{(x)n}].
  std::vector<double> beta;   ///< tr[P (gamma_E (x) rho_X)^{(x)n}].
  double alpha_log_slope = 0.0;
  double beta_log_slope = 0.0;
  /// beta w0 + 4 delta + beta F_E, the decay rate the test is built for.
  double reference_slope = 0.0;
  double rate = 0.0;
  bool rate_condition = false;  ///< rate < w0.
  bool beta_strictly_decreasing = false;
};
HypothesisTestReport hypothesis_test_exponents(const Matrix& rho_ex, const Matrix& h_e,
                                               const Matrix& h_x, double beta, double w0,
                                               const ProtocolParams& params,
                                               const std::vector<int>& n_range);

// ---------------------------------------------------------------------------
// Coherence loss under work-cost dephasing

/// The two single-copy E X Rbar qubit states: GHZ and |phi+>_{E Rbar}|0>_X.
std::pair<Vector, Vector> coherence_loss_states();

struct CoherenceLossRow {
  int n = 0;
  int num_work_values = 0;
  /// Trace norm of the <1|.|2> block of the X^n Rbar^n marginal, divided by sqrt(p1 p2).
  double undephased_norm = 0.0;
  double dephased_norm = 0.0;
  /// Same with the typical-block filters M^1 (.) M^2 on X^n.
  double undephased_filtered = 0.0;
  double dephased_filtered = 0.0;
};

/// filter_radius is the l1 radius around each X spectrum defining M^i.
std::vector<CoherenceLossRow> coherence_loss_experiment(const std::vector<int>& n_range,
                                                        double beta,
                                                        double filter_radius = 0.02,
                                                        double tol_w = 1e-9);

}  // namespace thermoforge
