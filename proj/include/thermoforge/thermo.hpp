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

/// \file thermo.hpp
/// \brief Gibbs states, work functionals, thermodynamic capacity, and the
/// information-battery ledger. Entropies are in nats, work in energy units.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "thermoforge/qcore.hpp"

namespace thermoforge {

/// Hamiltonian plus inverse temperature.
class GibbsContext {
 public:
  GibbsContext(const Matrix& h, double beta);

  const Matrix& hamiltonian() const { return h_; }
  double beta() const { return beta_; }
  int dim() const { return static_cast<int>(h_.rows()); }

  /// Gamma = exp(-beta H).
  Matrix gibbs_operator() const;
  /// gamma = Gamma / Z.
  Matrix gibbs_state() const;
  double partition_function() const { return z_; }
  /// F = -log(Z) / beta.
  double free_energy() const { return -std::log(z_) / beta_; }
  /// log(gamma), exact from the spectrum of H.
  Matrix log_gibbs_state() const;
  const RealVector& energies() const { return energies_; }

  /// D(rho || gamma) = -S(rho) + beta tr(rho H) + log Z.
  double relative_entropy_to_gibbs(const Matrix& rho) const;

 private:
  Matrix h_;
  double beta_;
  RealVector energies_;
  Matrix eigvecs_;
  double z_;
};

/// D(rho || sigma) in nats; +infinity when supp(rho) is not inside supp(sigma).
/// Throws std::invalid_argument on malformed input.
double relative_entropy(const Matrix& rho, const Matrix& sigma);

/// beta^{-1} [D(E(sigma) || gamma) - D(sigma || gamma)].
double work_cost(const QuantumChannel& channel, const Matrix& sigma, const GibbsContext& ctx);

struct CapacityOptions {
  int restarts = 20;
  std::uint64_t seed = 0;
  int max_iterations = 5000;
  double gradient_tol = 1e-8;
  /// Bloch-ball grid step used to certify qubit results.
  double grid_step = 0.05;
  bool certify = true;
};

struct CapacityResult {
  double value = 0.0;
  DensityOperator argmax_state;
  /// Best value after each restart, then after refinement.
  std::vector<double> trace;
  /// Best value found on the certification grid (NaN when not run).
  double grid_value = std::numeric_limits<double>::quiet_NaN();
  bool converged = false;
};

/// Maximum of work_cost over input states.
CapacityResult thermodynamic_capacity(const QuantumChannel& channel, const GibbsContext& ctx,
                                      const CapacityOptions& opts = {});

/// Maximum of work_cost(E, sigma) over the grid used for certification.
/// Qubits: all Bloch vectors on a cubic grid of the given step inside the
/// unit ball. Qutrits: spectra on a simplex grid times a fixed unitary set.
double grid_capacity(const QuantumChannel& channel, const GibbsContext& ctx, double step,
                     Matrix* argmax = nullptr);

/// max_sigma work_cost over a finite set, plus 5 delta / beta if delta given.
double worst_case_work(const QuantumChannel& channel, const GibbsContext& ctx,
                       const std::vector<Matrix>& states,
                       std::optional<double> delta = std::nullopt);

/// Work extractable by turning the eigenstate of energy `level` into gamma:
/// E + log(Z)/beta. Converting gamma back into the eigenstate costs the same.
double eigenstate_thermal_work(double level, const GibbsContext& ctx);

/// Information battery. A charge is a uniform state of integer rank r; its
/// energy is (ref_rank_log - log r) / beta, so rank 1 is the fullest state.
struct Battery {
  std::int64_t ref_rank_log = 0;
  std::uint64_t rank = 1;

  double energy(double beta) const;
};

/// Probability that the charge test at threshold rank passes:
/// tr[tau_charge Pi_threshold] = min(1, threshold_rank / rank).
double battery_test(const Battery& b, std::uint64_t threshold_rank);

struct LedgerEntry {
  enum class Kind { kDeterministic, kVariable };
  std::string label;
  double work = 0.0;  ///< Work drawn from the battery, energy units.
  Kind kind = Kind::kDeterministic;
};

/// Append-only record of battery charge changes.
class WorkLedger {
 public:
  void record(std::string label, double work,
              LedgerEntry::Kind kind = LedgerEntry::Kind::kDeterministic);
  WorkLedger& append(const WorkLedger& other);
  friend WorkLedger operator+(WorkLedger a, const WorkLedger& b) { return a.append(b); }

  const std::vector<LedgerEntry>& entries() const { return entries_; }
  double total() const;

 private:
  std::vector<LedgerEntry> entries_;
};

/// Draws `work` from the battery, rounding the new rank up to an integer.
/// The rounding surplus (>= 0) is logged as its own ledger entry.
Battery draw_work(const Battery& b, double work, double beta, WorkLedger& ledger,
                  const std::string& label);

}  // namespace thermoforge
