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

#include "thermoforge/thermo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "thermoforge/random.hpp"

namespace thermoforge {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Log of a PSD matrix with eigenvalues floored at a tiny positive value.
Matrix safe_log(const Matrix& rho) {
  return spectral_apply(rho, [](double x) { return std::log(std::max(x, 1e-300)); });
}

void check_state(const Matrix& rho, const char* who) {
  if (rho.rows() != rho.cols()) throw std::invalid_argument(std::string(who) + ": not square");
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > kHermitianTol)
    throw std::invalid_argument(std::string(who) + ": not Hermitian");
  if (std::abs(rho.trace().real() - 1.0) > kTraceTol)
    throw std::invalid_argument(std::string(who) + ": trace is not 1");
}

}  // namespace

// ---------------------------------------------------------------------------
// GibbsContext

GibbsContext::GibbsContext(const Matrix& h, double beta) : h_(hermitize(h)), beta_(beta) {
  if (h.rows() != h.cols() || h.rows() == 0)
    throw std::invalid_argument("GibbsContext: Hamiltonian must be square");
  if ((h - h.adjoint()).cwiseAbs().maxCoeff() > kHermitianTol)
    throw std::invalid_argument("GibbsContext: Hamiltonian is not Hermitian");
  if (!(beta > 0.0) || !std::isfinite(beta))
    throw std::invalid_argument("GibbsContext: beta must be positive and finite");
  const EigenSystem es = eigh(h_);
  energies_ = es.values;
  eigvecs_ = es.vectors;
  // Z computed relative to the ground energy to avoid overflow.
  const double e0 = energies_.minCoeff();
  double shifted = 0.0;
  for (int i = 0; i < energies_.size(); ++i) shifted += std::exp(-beta_ * (energies_(i) - e0));
  z_ = shifted * std::exp(-beta_ * e0);
}

Matrix GibbsContext::gibbs_operator() const {
  RealVector g = (-beta_ * energies_).array().exp();
  return eigvecs_ * g.asDiagonal() * eigvecs_.adjoint();
}

Matrix GibbsContext::gibbs_state() const { return gibbs_operator() / z_; }

Matrix GibbsContext::log_gibbs_state() const {
  RealVector l = -beta_ * energies_;
  l.array() -= std::log(z_);
  return eigvecs_ * l.asDiagonal() * eigvecs_.adjoint();
}

double GibbsContext::relative_entropy_to_gibbs(const Matrix& rho) const {
  return -von_neumann_entropy(rho) + beta_ * (rho * h_).trace().real() + std::log(z_);
}

// ---------------------------------------------------------------------------
// Functionals

double relative_entropy(const Matrix& rho, const Matrix& sigma) {
  check_state(rho, "relative_entropy");
  if (sigma.rows() != rho.rows() || sigma.cols() != rho.cols())
    throw std::invalid_argument("relative_entropy: size mismatch");
  if ((sigma - sigma.adjoint()).cwiseAbs().maxCoeff() > kHermitianTol)
    throw std::invalid_argument("relative_entropy: sigma is not Hermitian");
  const EigenSystem es = eigh(sigma);
  const double top = es.values.maxCoeff();
  if (es.values.minCoeff() < -kHermitianTol * std::max(1.0, top))
    throw std::invalid_argument("relative_entropy: sigma is not PSD");
  const double cutoff = kRankCutoff * top;
  const Matrix rotated = es.vectors.adjoint() * hermitize(rho) * es.vectors;
  double cross = 0.0;
  for (int i = 0; i < es.values.size(); ++i) {
    const double weight = rotated(i, i).real();
    if (es.values(i) <= cutoff) {
      if (weight > kRankCutoff) return kInf;
      continue;
    }
    cross += weight * std::log(es.values(i));
  }
  return -von_neumann_entropy(rho) - cross;
}

double work_cost(const QuantumChannel& channel, const Matrix& sigma, const GibbsContext& ctx) {
  if (channel.dim_in() != ctx.dim() || channel.dim_out() != ctx.dim())
    throw std::invalid_argument("work_cost: channel dims do not match the Hamiltonian");
  check_state(sigma, "work_cost");
  const Matrix out = hermitize(channel(sigma));
  return (ctx.relative_entropy_to_gibbs(out) - ctx.relative_entropy_to_gibbs(sigma)) / ctx.beta();
}

double worst_case_work(const QuantumChannel& channel, const GibbsContext& ctx,
                       const std::vector<Matrix>& states, std::optional<double> delta) {
  if (states.empty()) throw std::invalid_argument("worst_case_work: empty state set");
  double best = -kInf;
  for (const Matrix& s : states) best = std::max(best, work_cost(channel, s, ctx));
  if (delta) best += 5.0 * *delta / ctx.beta();
  return best;
}

double eigenstate_thermal_work(double level, const GibbsContext& ctx) {
  const RealVector& e = ctx.energies();
  bool found = false;
  for (int i = 0; i < e.size(); ++i) found = found || std::abs(e(i) - level) <= 1e-9;
  if (!found) throw std::invalid_argument("eigenstate_thermal_work: level is not an eigenvalue");
  return level + std::log(ctx.partition_function()) / ctx.beta();
}

// ---------------------------------------------------------------------------
// Capacity

namespace {

struct Objective {
  const QuantumChannel& channel;
  const GibbsContext& ctx;
  std::vector<Matrix> kraus;
  Matrix log_gamma;

  Objective(const QuantumChannel& e, const GibbsContext& c)
      : channel(e), ctx(c), kraus(channel_views(e).kraus), log_gamma(c.log_gibbs_state()) {}

  Matrix apply(const Matrix& rho) const {
    Matrix out = Matrix::Zero(channel.dim_out(), channel.dim_out());
    for (const Matrix& k : kraus) out.noalias() += k * rho * k.adjoint();
    return hermitize(out);
  }

  Matrix adjoint(const Matrix& x) const {
    Matrix out = Matrix::Zero(channel.dim_in(), channel.dim_in());
    for (const Matrix& k : kraus) out.noalias() += k.adjoint() * x * k;
    return hermitize(out);
  }

  double value(const Matrix& rho) const {
    return (ctx.relative_entropy_to_gibbs(apply(rho)) - ctx.relative_entropy_to_gibbs(rho)) /
           ctx.beta();
  }

  // Euclidean gradient of value() with respect to rho.
  Matrix gradient(const Matrix& rho) const {
    const Matrix out = apply(rho);
    return hermitize(adjoint(safe_log(out) - log_gamma) - (safe_log(rho) - log_gamma)) /
           ctx.beta();
  }
};

Matrix state_of(const Matrix& a) {
  Matrix rho = a * a.adjoint();
  return hermitize(rho / rho.trace().real());
}

struct AscentResult {
  Matrix a;
  double value;
  bool converged;
};

// Gradient ascent in A with rho = AA^dagger / tr(AA^dagger) and backtracking.
AscentResult ascend(const Objective& obj, Matrix a, int max_iterations, double gradient_tol) {
  a /= a.norm();
  Matrix rho = state_of(a);
  double f = obj.value(rho);
  double step = 1.0;
  for (int it = 0; it < max_iterations; ++it) {
    const Matrix g = obj.gradient(rho);
    const cplx mean = (g * rho).trace();
    Matrix dir = 2.0 * (g - mean.real() * Matrix::Identity(g.rows(), g.cols())) * a;
    const double gnorm = dir.norm();
    if (gnorm <= gradient_tol) return {a, f, true};
    step = std::min(step * 2.0, 1e3);
    bool accepted = false;
    while (step > 1e-18) {
      Matrix trial = a + step * dir;
      trial /= trial.norm();
      const Matrix trial_rho = state_of(trial);
      const double ft = obj.value(trial_rho);
      if (ft >= f + 1e-4 * step * gnorm * gnorm) {
        a = trial;
        rho = trial_rho;
        f = ft;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) return {a, f, gnorm <= 1e3 * gradient_tol};
  }
  return {a, f, false};
}

}  // namespace

double grid_capacity(const QuantumChannel& channel, const GibbsContext& ctx, double step,
                     Matrix* argmax) {
  const Objective obj(channel, ctx);
  const int d = channel.dim_in();
  double best = -kInf;
  Matrix best_rho;
  auto consider = [&](const Matrix& rho) {
    const double v = obj.value(rho);
    if (v > best) {
      best = v;
      best_rho = rho;
    }
  };
  if (d == 2) {
    const int m = static_cast<int>(std::floor(1.0 / step + 1e-9));
    for (int i = -m; i <= m; ++i)
      for (int j = -m; j <= m; ++j)
        for (int k = -m; k <= m; ++k) {
          const double x = i * step, y = j * step, z = k * step;
          if (x * x + y * y + z * z > 1.0 + 1e-12) continue;
          Matrix rho(2, 2);
          rho << cplx(1.0 + z, 0.0), cplx(x, -y), cplx(x, y), cplx(1.0 - z, 0.0);
          consider(0.5 * rho);
        }
  } else if (d == 3) {
    // Spectra on a simplex grid, rotated by a fixed family of unitaries.
    CounterRng rng(0x5eedULL, 3);
    std::vector<Matrix> unitaries{Matrix::Identity(3, 3)};
    for (int u = 0; u < 48; ++u) unitaries.push_back(haar_unitary(3, rng));
    const int m = static_cast<int>(std::floor(1.0 / std::max(step, 0.1) + 1e-9));
    for (int a = 0; a <= m; ++a)
      for (int b = 0; a + b <= m; ++b) {
        RealVector p(3);
        p << double(a) / m, double(b) / m, double(m - a - b) / m;
        for (const Matrix& u : unitaries) consider(hermitize(u * p.asDiagonal() * u.adjoint()));
      }
  } else {
    throw std::invalid_argument("grid_capacity: only dimensions 2 and 3 are supported");
  }
  if (argmax) *argmax = best_rho;
  return best;
}

CapacityResult thermodynamic_capacity(const QuantumChannel& channel, const GibbsContext& ctx,
                                      const CapacityOptions& opts) {
  if (channel.dim_in() != channel.dim_out() || channel.dim_in() != ctx.dim())
    throw std::invalid_argument("thermodynamic_capacity: channel dims do not match H");
  if (opts.restarts < 1) throw std::invalid_argument("thermodynamic_capacity: restarts < 1");
  const Objective obj(channel, ctx);
  const int d = channel.dim_in();
  const CounterRng root(opts.seed, 0xca9aULL);

  std::vector<AscentResult> runs(opts.restarts);
#pragma omp parallel for schedule(dynamic)
  for (int r = 0; r < opts.restarts; ++r) {
    CounterRng rng = root.split(static_cast<std::uint64_t>(r));
    runs[r] = ascend(obj, ginibre(d, d, rng), opts.max_iterations, opts.gradient_tol);
  }

  std::vector<double> trace;
  int best = 0;
  for (int r = 0; r < opts.restarts; ++r) {
    if (runs[r].value > runs[best].value) best = r;
    trace.push_back(runs[best].value);
  }
  AscentResult top = ascend(obj, runs[best].a, 2 * opts.max_iterations, opts.gradient_tol);
  if (top.value < runs[best].value) top = runs[best];
  trace.push_back(top.value);

  double grid_value = std::numeric_limits<double>::quiet_NaN();
  if (opts.certify && d <= 3) {
    Matrix grid_rho;
    grid_value = grid_capacity(channel, ctx, opts.grid_step, &grid_rho);
    if (grid_value > top.value) {
      // Restart from the grid point; keep the grid point itself if ascent stalls.
      const Matrix a = spectral_apply(grid_rho, [](double x) { return std::sqrt(std::max(x, 1e-14)); });
      AscentResult from_grid = ascend(obj, a, 2 * opts.max_iterations, opts.gradient_tol);
      if (from_grid.value >= grid_value) {
        top = from_grid;
      } else {
        top = {spectral_apply(grid_rho, [](double x) { return std::sqrt(std::max(x, 0.0)); }),
               grid_value, false};
      }
      trace.push_back(top.value);
    }
  }

  const Matrix rho = state_of(top.a);
  CapacityResult result{obj.value(rho), DensityOperator(rho), trace, grid_value, top.converged};
  return result;
}

// ---------------------------------------------------------------------------
// Battery and ledger

double Battery::energy(double beta) const {
  return (static_cast<double>(ref_rank_log) - std::log(static_cast<double>(rank))) / beta;
}

double battery_test(const Battery& b, std::uint64_t threshold_rank) {
  if (b.rank == 0 || threshold_rank == 0) throw std::invalid_argument("battery_test: rank 0");
  if (threshold_rank >= b.rank) return 1.0;
  return static_cast<double>(threshold_rank) / static_cast<double>(b.rank);
}

void WorkLedger::record(std::string label, double work, LedgerEntry::Kind kind) {
  entries_.push_back({std::move(label), work, kind});
}

WorkLedger& WorkLedger::append(const WorkLedger& other) {
  entries_.insert(entries_.end(), other.entries_.begin(), other.entries_.end());
  return *this;
}

double WorkLedger::total() const {
  double t = 0.0;
  for (const LedgerEntry& e : entries_) t += e.work;
  return t;
}

Battery draw_work(const Battery& b, double work, double beta, WorkLedger& ledger,
                  const std::string& label) {
  const double log_exact = std::log(static_cast<double>(b.rank)) + beta * work;
  if (log_exact < -1e-12) throw std::invalid_argument("draw_work: charge exceeds rank-1 state");
  if (log_exact > 62.0 * std::log(2.0)) throw std::overflow_error("draw_work: rank overflow");
  const double exact = std::exp(log_exact);
  const double rounded = std::max(1.0, std::ceil(exact * (1.0 - 1e-12)));
  ledger.record(label, work);
  const double surplus = (std::log(rounded) - log_exact) / beta;
  ledger.record(label + ": rank rounding", surplus);
  return Battery{b.ref_rank_log, static_cast<std::uint64_t>(rounded)};
}

}  // namespace thermoforge
