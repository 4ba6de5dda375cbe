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

#include "thermoforge/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

#include "thermoforge/covariant.hpp"
#include "thermoforge/random.hpp"

namespace thermoforge {

namespace {

constexpr double kProbabilityFloor = 1e-14;

int ipow(int base, int exp) {
  int r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

Indices range_indices(int begin, int end) {
  Indices out(end - begin);
  std::iota(out.begin(), out.end(), begin);
  return out;
}

double least_squares_slope(const std::vector<int>& x, const std::vector<double>& y) {
  const double m = static_cast<double>(x.size());
  if (x.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / m;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / m;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

double log_slope_or_nan(const std::vector<int>& n, const std::vector<double>& values) {
  std::vector<double> logs;
  for (double v : values) {
    if (!(v > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    logs.push_back(std::log(v));
  }
  return least_squares_slope(n, logs);
}

double gibbs_relative_entropy(const Matrix& rho, const GibbsContext& ctx) {
  // D(rho || Gamma) = D(rho || gamma) - log Z.
  return ctx.relative_entropy_to_gibbs(rho) - std::log(ctx.partition_function());
}

Matrix joint_hamiltonian(const Matrix& h_e, const Matrix& h_x) {
  const auto de = h_e.rows();
  const auto dx = h_x.rows();
  return tensor(h_e, Matrix::Identity(dx, dx)) + tensor(Matrix::Identity(de, de), h_x);
}

WorkValuePOVM subset_at_most(const WorkValuePOVM& povm, double threshold) {
  WorkValuePOVM out;
  out.kind = povm.kind;
  out.dims = povm.dims;
  for (int i = 0; i < povm.size(); ++i) {
    if (povm.values[i] > threshold) continue;
    out.values.push_back(povm.values[i]);
    out.elements.push_back(povm.elements[i]);
  }
  return out;
}

double semiuniversal_charge(double w0, const ErasureSetup& setup, double delta) {
  const double fe = GibbsContext(setup.h_e, setup.beta).free_energy();
  return setup.n * (w0 + 5.0 * delta / setup.beta + fe) + std::log(2.0) / setup.beta;
}

SemiuniversalResult semiuniversal_with(const Matrix& rho, const ErasureSetup& setup,
                                       const WorkValuePOVM& povm, double w0,
                                       const ProtocolParams& params) {
  const double threshold = w0 + 4.0 * params.delta / setup.beta + params.tol_w;
  const WorkValuePOVM accepted = subset_at_most(povm, threshold);
  SemiuniversalResult out;
  if (accepted.size() == 0) throw std::domain_error("semiuniversal_erasure: nothing captured");
  const Matrix kept =
      dephase_W(rho, setup.dims(), range_indices(0, 2 * setup.n), accepted);
  out.accepted = kept.trace().real();
  if (out.accepted <= kProbabilityFloor)
    throw std::domain_error("semiuniversal_erasure: nothing captured");
  out.output = attach_thermal_environment(trace_environment(kept, setup) / out.accepted, setup);
  out.ledger.record("semiuniversal erasure", semiuniversal_charge(w0, setup, params.delta));
  return out;
}

void check_setup(const Matrix& rho, const ErasureSetup& setup) {
  if (setup.n < 1 || setup.d_r < 1 || !(setup.beta > 0.0))
    throw std::invalid_argument("ErasureSetup: bad n, d_r or beta");
  if (rho.rows() != total_dim(setup.dims()) || rho.cols() != rho.rows())
    throw std::invalid_argument("erasure: state does not match the setup dimensions");
}

std::pair<Matrix, int> select_isometry(const QuantumChannel& channel, const Matrix& h_x) {
  if (channel.dim_in() != channel.dim_out() || channel.dim_in() != h_x.rows())
    throw std::invalid_argument("gpm_variable_map: channel must map X to X");
  if (is_time_covariant(channel, h_x).covariant) {
    const CovariantDilation dil = covariant_dilation(channel, h_x);
    return {dil.v, dil.env_dim()};
  }
  const ChannelViews views = channel_views(channel);
  return {views.stinespring.matrix(), static_cast<int>(views.kraus.size())};
}

double operator_norm(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

// Upper bound on the battery slack for which sum_w e^{-beta n w} T_w(Gamma^n)
// stays below Gamma_X'^n: m * max_mu sum_lambda e^{n(S(mu)-S(lambda))} a(lambda, mu),
// with m the largest number of (l, mu) sharing a (k, lambda, w) and
// a(lambda, mu) the block overlap of tr_E Pi^lambda inside Pi^mu.
double gpm_slack(const Matrix& v, int d_e, const Matrix& h_x, const Matrix& h_xp, int n,
                 double beta, double tol_w) {
  const int dxp = static_cast<int>(h_xp.rows());
  const int d = d_e * dxp;
  const Matrix gamma_x = spectral_apply(h_x, [beta](double e) { return std::exp(-beta * e); });
  const EigenSystem joint = eigh(v * gamma_x * v.adjoint());
  const double top = joint.values.maxCoeff();
  std::vector<double> site;
  for (int s = 0; s < d; ++s)
    if (joint.values(s) > kRankCutoff * top) site.push_back(-std::log(joint.values(s)) / beta);
  // Total energies over products of finite sites.
  std::vector<double> totals{0.0};
  for (int c = 0; c < n; ++c) {
    std::vector<double> next;
    for (double t : totals)
      for (double e : site) next.push_back(t + e);
    totals = std::move(next);
  }
  const std::vector<double> k_energies = quantize_work_values(totals, tol_w).first;
  const std::vector<double> l_energies = energy_blocks(h_xp, n, tol_w).energies;
  const std::vector<YoungDiagram> lambdas = young_diagrams(n, d);
  const std::vector<YoungDiagram> mus = young_diagrams(n, dxp);

  struct Key {
    std::size_t k, li;
  };
  std::vector<double> raw;
  std::vector<Key> keys;
  for (std::size_t k = 0; k < k_energies.size(); ++k)
    for (std::size_t li = 0; li < lambdas.size(); ++li)
      for (double el : l_energies)
        for (const YoungDiagram& mu : mus) {
          raw.push_back((el / n - mu.entropy() / beta) -
                        (k_energies[k] / n - lambdas[li].entropy() / beta));
          keys.push_back({k, li});
        }
  const std::vector<int> bins = quantize_work_values(raw, tol_w).second;
  std::map<std::tuple<std::size_t, std::size_t, int>, int> group;
  int m = 1;
  for (std::size_t i = 0; i < raw.size(); ++i)
    m = std::max(m, ++group[{keys[i].k, keys[i].li, bins[i]}]);

  const Dims dims = interleaved_dims(d_e, dxp, n);
  double worst = 0.0;
  for (const YoungDiagram& mu : mus) {
    const Matrix pm =
        embed(schur_weyl_projector(mu, n, dxp).complex_projector(), dims, x_sites(n));
    const double tr_mu = schur_weyl_projector(mu, n, dxp).projector->trace();
    double sum = 0.0;
    for (const YoungDiagram& lambda : lambdas) {
      const Matrix pl = schur_weyl_projector(lambda, n, d).complex_projector();
      const double a = (pl * pm).trace().real() / tr_mu;
      sum += std::exp(n * (mu.entropy() - lambda.entropy())) * a;
    }
    worst = std::max(worst, sum);
  }
  return std::log(m * worst) / beta;
}

}  // namespace

// ---------------------------------------------------------------------------
// Shared types

void ProtocolParams::validate() const {
  if (n < 1) throw std::invalid_argument("ProtocolParams: n must be >= 1");
  if (!(delta > 0.0)) throw std::invalid_argument("ProtocolParams: delta must be positive");
  if (!(tol_w > 0.0)) throw std::invalid_argument("ProtocolParams: tol_w must be positive");
}

double WorkDistribution::total() const {
  return std::accumulate(probabilities.begin(), probabilities.end(), 0.0);
}

double WorkDistribution::mean() const {
  double m = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i)
    if (probabilities[i] > kProbabilityFloor) m += probabilities[i] * values[i];
  return m;
}

double WorkDistribution::max_support(double cutoff) const {
  for (std::size_t i = values.size(); i-- > 0;)
    if (probabilities[i] > cutoff) return values[i];
  return -std::numeric_limits<double>::infinity();
}

double WorkDistribution::mass_within(double center, double radius) const {
  double m = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i)
    if (std::abs(values[i] - center) <= radius) m += probabilities[i];
  return m;
}

WorkDistribution work_distribution(const WorkValuePOVM& povm, const Matrix& rho) {
  WorkDistribution out;
  for (int i = 0; i < povm.size(); ++i) {
    const Matrix& m = povm.elements[i];
    const double p = povm.kind == WorkValuePOVM::Kind::kProjective
                         ? (m * rho).trace().real()
                         : (m * rho * m.adjoint()).trace().real();
    out.values.push_back(povm.values[i]);
    out.probabilities.push_back(std::max(p, 0.0));
  }
  return out;
}

DecayReport make_decay_report(const std::vector<int>& n, const std::vector<double>& values) {
  if (n.size() != values.size()) throw std::invalid_argument("make_decay_report: size mismatch");
  DecayReport r;
  r.n = n;
  r.values = values;
  for (std::size_t i = 1; i < values.size(); ++i) {
    r.nonincreasing = r.nonincreasing && values[i] <= values[i - 1];
    r.strictly_decreasing = r.strictly_decreasing && values[i] < values[i - 1];
    r.nondecreasing = r.nondecreasing && values[i] >= values[i - 1];
  }
  r.log_slope = log_slope_or_nan(n, values);
  r.rate = -r.log_slope;
  return r;
}

// ---------------------------------------------------------------------------
// Free-energy estimation

std::vector<EstimatorOutcome> free_energy_outcomes(const Matrix& rho, const Matrix& h,
                                                   double beta, int n) {
  const int d = static_cast<int>(rho.rows());
  if (h.rows() != d) throw std::invalid_argument("free_energy_outcomes: size mismatch");
  const Matrix rho_n = tensor_power(rho, n);
  const EnergyBlockFamily energy = energy_blocks(h, n);
  std::vector<EstimatorOutcome> out;
  for (const YoungDiagram& lambda : young_diagrams(n, d)) {
    const Matrix pl = schur_weyl_projector(lambda, n, d).complex_projector() * rho_n;
    for (std::size_t k = 0; k < energy.energies.size(); ++k) {
      const double p = (energy.projectors[k] * pl).trace().real();
      if (p <= kProbabilityFloor) continue;
      out.push_back({lambda, energy.energies[k],
                     energy.energies[k] / n - lambda.entropy() / beta, p});
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.estimate < b.estimate; });
  return out;
}

EstimatorStats free_energy_estimator(const Matrix& rho, const Matrix& h, double beta, int n,
                                     int samples, std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("free_energy_estimator: samples must be >= 1");
  const std::vector<EstimatorOutcome> outcomes = free_energy_outcomes(rho, h, beta, n);
  std::vector<double> cumulative;
  double acc = 0.0;
  EstimatorStats st;
  for (const EstimatorOutcome& o : outcomes) {
    acc += o.probability;
    cumulative.push_back(acc);
    st.exact_mean += o.probability * o.estimate;
  }
  st.exact_mean /= acc;
  st.target = (h * rho).trace().real() - von_neumann_entropy(rho) / beta;

  CounterRng rng(seed);
  st.samples.reserve(samples);
  for (int s = 0; s < samples; ++s) {
    const double u = rng.uniform() * acc;
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    const std::size_t idx =
        std::min<std::size_t>(it - cumulative.begin(), outcomes.size() - 1);
    st.samples.push_back(outcomes[idx].estimate);
  }
  st.mean = std::accumulate(st.samples.begin(), st.samples.end(), 0.0) / samples;
  double var = 0.0;
  for (double x : st.samples) var += (x - st.mean) * (x - st.mean);
  st.stddev = samples > 1 ? std::sqrt(var / (samples - 1)) : 0.0;
  return st;
}

// ---------------------------------------------------------------------------
// Conditional erasure

Dims ErasureSetup::dims() const {
  Dims dims = interleaved_dims(d_e(), d_x(), n);
  dims.push_back(d_r);
  return dims;
}

double erasure_rate(const Matrix& rho_ex, const Matrix& h_e, const Matrix& h_x, double beta) {
  const int de = static_cast<int>(h_e.rows());
  const int dx = static_cast<int>(h_x.rows());
  if (rho_ex.rows() != de * dx) throw std::invalid_argument("erasure_rate: size mismatch");
  const GibbsContext ge(h_e, beta), gx(h_x, beta), gex(joint_hamiltonian(h_e, h_x), beta);
  const Matrix rho_x = partial_trace(rho_ex, {de, dx}, {1});
  return (gibbs_relative_entropy(rho_x, gx) - gibbs_relative_entropy(rho_ex, gex)) / beta +
         ge.free_energy();
}

ErasureWorkReport erasure_work_distribution(const Matrix& rho_ex, const Matrix& h_e,
                                            const Matrix& h_x, double beta, int n,
                                            double tol_w) {
  const WorkValuePOVM povm = work_value_povm_EX(h_e, h_x, n, beta, tol_w);
  return {work_distribution(povm, tensor_power(rho_ex, n)), erasure_rate(rho_ex, h_e, h_x, beta)};
}

Matrix attach_thermal_environment(const Matrix& rho_xr, const ErasureSetup& setup) {
  const int n = setup.n;
  const Matrix gamma_e = GibbsContext(setup.h_e, setup.beta).gibbs_state();
  Dims dims(n, setup.d_e());
  dims.insert(dims.end(), n, setup.d_x());
  dims.push_back(setup.d_r);
  if (rho_xr.rows() != ipow(setup.d_x(), n) * setup.d_r)
    throw std::invalid_argument("attach_thermal_environment: size mismatch");
  Indices order;
  for (int i = 0; i < n; ++i) order.insert(order.end(), {i, n + i});
  order.push_back(2 * n);
  return permute_subsystems(tensor(tensor_power(gamma_e, n), rho_xr), dims, order);
}

Matrix trace_environment(const Matrix& rho, const ErasureSetup& setup) {
  Indices keep = x_sites(setup.n);
  keep.push_back(2 * setup.n);
  return partial_trace(rho, setup.dims(), keep);
}

SemiuniversalResult semiuniversal_erasure(const Matrix& rho, const ErasureSetup& setup,
                                          double w0, const ProtocolParams& params) {
  params.validate();
  check_setup(rho, setup);
  const WorkValuePOVM povm =
      work_value_povm_EX(setup.h_e, setup.h_x, setup.n, setup.beta, params.tol_w);
  return semiuniversal_with(rho, setup, povm, w0, params);
}

DecayReport semiuniversal_acceptance(const Matrix& rho_ex, const Matrix& h_e, const Matrix& h_x,
                                     double beta, double w0, const ProtocolParams& params,
                                     const std::vector<int>& n_range) {
  std::vector<double> weights;
  for (int n : n_range) {
    const ErasureSetup setup{h_e, h_x, beta, n, 1};
    const WorkValuePOVM povm = work_value_povm_EX(h_e, h_x, n, beta, params.tol_w);
    const Matrix p = povm.at_most(w0 + 4.0 * params.delta / beta + params.tol_w);
    weights.push_back((p * tensor_power(rho_ex, n)).trace().real());
  }
  return make_decay_report(n_range, weights);
}

VariableErasureResult variable_work_erasure(const Matrix& rho, const ErasureSetup& setup,
                                            const ProtocolParams& params) {
  params.validate();
  check_setup(rho, setup);
  const WorkValuePOVM povm =
      work_value_povm_EX(setup.h_e, setup.h_x, setup.n, setup.beta, params.tol_w);
  const Dims dims = setup.dims();
  const Indices joint = range_indices(0, 2 * setup.n);

  VariableErasureResult out;
  out.ledger.record("outcome memory reset", std::log(static_cast<double>(povm.size())) / setup.beta);
  const double fixed = out.ledger.total();
  out.output = Matrix::Zero(rho.rows(), rho.cols());
  for (int i = 0; i < povm.size(); ++i) {
    WorkValuePOVM single;
    single.dims = povm.dims;
    single.values = {povm.values[i]};
    single.elements = {povm.elements[i]};
    const Matrix branch = dephase_W(rho, dims, joint, single);
    const double p = std::max(branch.trace().real(), 0.0);
    const double w0 = povm.values[i] + params.delta / setup.beta;
    out.outcomes.values.push_back(povm.values[i]);
    out.outcomes.probabilities.push_back(p);
    out.charges.values.push_back(semiuniversal_charge(w0, setup, params.delta) + fixed);
    out.charges.probabilities.push_back(p);
    if (p <= kProbabilityFloor) continue;
    const SemiuniversalResult r = semiuniversal_with(branch / p, setup, povm, w0, params);
    out.output += p * r.output;
  }
  const Matrix target = attach_thermal_environment(
      trace_environment(dephase_W(rho, dims, joint, povm), setup), setup);
  out.target_distance = trace_distance(out.output, target);
  out.target_fidelity = fidelity(out.output, target);
  return out;
}

// ---------------------------------------------------------------------------
// Process implementation

VariableProcessResult variable_work_process(const QuantumChannel& channel, const Matrix& h_x,
                                            const Matrix& sigma, int d_r, double beta,
                                            const ProtocolParams& params) {
  params.validate();
  const int n = params.n;
  const int dx = static_cast<int>(h_x.rows());
  if (sigma.rows() != ipow(dx, n) * d_r)
    throw std::invalid_argument("variable_work_process: input size mismatch");
  const CovariantDilation dil = covariant_dilation(channel, h_x);
  const Matrix vn = tensor(tensor_power(dil.v, n), Matrix::Identity(d_r, d_r));
  const Matrix rho = vn * sigma * vn.adjoint();

  const ErasureSetup setup{dil.env_hamiltonian(), h_x, beta, n, d_r};
  const double fe = GibbsContext(setup.h_e, beta).free_energy();
  const VariableErasureResult erasure = variable_work_erasure(rho, setup, params);

  VariableProcessResult out;
  out.ledger.record("environment reset", -n * fe);
  out.ledger.append(erasure.ledger);
  out.output = trace_environment(erasure.output, setup);
  for (std::size_t i = 0; i < erasure.outcomes.values.size(); ++i) {
    out.outcomes.values.push_back(erasure.outcomes.values[i] - fe);
    out.outcomes.probabilities.push_back(erasure.outcomes.probabilities[i]);
  }
  out.expected_total_work = -n * fe + erasure.charges.mean();

  const QuantumChannel dephased = dephased_channel(channel, h_x, n, beta, params.tol_w).channel();
  Dims dims(n, dx);
  dims.push_back(d_r);
  const Matrix expected = apply_channel(dephased, sigma, dims, range_indices(0, n));
  out.dephased_distance = trace_distance(out.output, expected);
  out.dephased_fidelity = fidelity(out.output, expected);
  return out;
}

VariableProcessResult variable_work_process_iid(const QuantumChannel& channel,
                                                const Matrix& h_x, const Matrix& sigma_1,
                                                double beta, const ProtocolParams& params) {
  VariableProcessResult out =
      variable_work_process(channel, h_x, tensor_power(sigma_1, params.n), 1, beta, params);
  out.target = work_cost(channel, sigma_1, GibbsContext(h_x, beta));
  return out;
}

// ---------------------------------------------------------------------------
// Gibbs-preserving variable-work map

GpmReport gpm_variable_map(const Matrix& v, int d_e, const Matrix& h_x, const Matrix& h_xp,
                           int n, double beta, double tol_w) {
  GpmReport rep;
  rep.operators = work_value_operators_gpm(v, d_e, h_x, h_xp, n, beta, tol_w);
  const WorkValuePOVM& ops = rep.operators;
  rep.completeness_error = ops.completeness_error();
  for (const Matrix& m : ops.elements) {
    rep.max_operator_norm = std::max(rep.max_operator_norm, operator_norm(m));
    rep.max_non_hermiticity =
        std::max(rep.max_non_hermiticity, (m - m.adjoint()).cwiseAbs().maxCoeff());
  }

  const int dx = static_cast<int>(h_x.rows());
  const int dxp = static_cast<int>(h_xp.rows());
  const int dxn = ipow(dx, n);
  const int dxpn = ipow(dxp, n);
  const int den = ipow(d_e, n);
  const Dims dims = interleaved_dims(d_e, dxp, n);
  const Matrix vn = tensor_power(v, n);
  const Matrix gamma_in =
      tensor_power(spectral_apply(h_x, [beta](double e) { return std::exp(-beta * e); }), n);
  const Matrix gamma_out =
      tensor_power(spectral_apply(h_xp, [beta](double e) { return std::exp(-beta * e); }), n);

  // Weighted image of the Gibbs operator; the null element maps it to zero.
  Matrix weighted = Matrix::Zero(dxpn, dxpn);
  const Matrix gamma_joint = vn * gamma_in * vn.adjoint();
  for (int i = 0; i < ops.size(); ++i) {
    if (i == ops.null_element) continue;
    const Matrix& m = ops.elements[i];
    weighted += std::exp(-beta * n * ops.values[i]) *
                partial_trace(m * gamma_joint * m.adjoint(), dims, x_sites(n));
  }
  weighted = hermitize(weighted);
  rep.slack = gpm_slack(v, d_e, h_x, h_xp, n, beta, tol_w);
  rep.gibbs_min_eigenvalue = min_eigenvalue(gamma_out - std::exp(-beta * rep.slack) * weighted);
  const Matrix inv_sqrt = spectral_apply(gamma_out, [](double g) { return 1.0 / std::sqrt(g); });
  rep.required_slack = std::log(max_eigenvalue(inv_sqrt * weighted * inv_sqrt)) / beta;

  // Choi matrix of sum_w tr_E T_w, ordered X'^n (x) R^n.
  Indices e_first = e_sites(n);
  for (int s : x_sites(n)) e_first.push_back(s);
  rep.choi = Matrix::Zero(dxpn * dxn, dxpn * dxn);
  for (const Matrix& m : ops.elements) {
    const Matrix k = m * vn;
    Matrix y(dxpn * dxn, den);
    for (int r = 0; r < dxn; ++r) {
      const Vector col = permute_subsystems(Vector(k.col(r)), dims, e_first);
      for (int e = 0; e < den; ++e)
        for (int x = 0; x < dxpn; ++x) y(x * dxn + r, e) = col(e * dxpn + x);
    }
    rep.choi.noalias() += y * y.adjoint();
  }
  rep.choi = hermitize(rep.choi);
  rep.trace_preservation_error =
      (partial_trace(rep.choi, {dxpn, dxn}, {1}) - Matrix::Identity(dxn, dxn))
          .cwiseAbs()
          .maxCoeff();
  return rep;
}

GpmReport gpm_variable_map(const QuantumChannel& channel, const Matrix& h_x, int n,
                           double beta, double tol_w) {
  const auto [v, d_e] = select_isometry(channel, h_x);
  return gpm_variable_map(v, d_e, h_x, h_x, n, beta, tol_w);
}

DecayReport gpm_concentration(const QuantumChannel& channel, const Matrix& h_x,
                              const Matrix& sigma, double beta, const ProtocolParams& params,
                              const std::vector<int>& n_range) {
  const auto [v, d_e] = select_isometry(channel, h_x);
  const double target = work_cost(channel, sigma, GibbsContext(h_x, beta));
  std::vector<double> mass;
  for (int n : n_range) {
    const WorkValuePOVM ops = work_value_operators_gpm(v, d_e, h_x, h_x, n, beta, params.tol_w);
    const Matrix vn = tensor_power(v, n);
    const WorkDistribution dist =
        work_distribution(ops, vn * tensor_power(sigma, n) * vn.adjoint());
    mass.push_back(dist.mass_within(target, params.delta / beta));
  }
  return make_decay_report(n_range, mass);
}

// ---------------------------------------------------------------------------
// Hypothesis test

HypothesisTestReport hypothesis_test_exponents(const Matrix& rho_ex, const Matrix& h_e,
                                               const Matrix& h_x, double beta, double w0,
                                               const ProtocolParams& params,
                                               const std::vector<int>& n_range) {
  params.validate();
  const int de = static_cast<int>(h_e.rows());
  const int dx = static_cast<int>(h_x.rows());
  const Matrix rho_x = partial_trace(rho_ex, {de, dx}, {1});
  const Matrix alt = tensor(GibbsContext(h_e, beta).gibbs_state(), rho_x);
  HypothesisTestReport rep;
  rep.n = n_range;
  for (int n : n_range) {
    const WorkValuePOVM povm = work_value_povm_EX(h_e, h_x, n, beta, params.tol_w);
    const Matrix p = povm.at_most(w0 + 4.0 * params.delta / beta + params.tol_w);
    rep.alpha.push_back((p * tensor_power(rho_ex, n)).trace().real());
    rep.beta.push_back((p * tensor_power(alt, n)).trace().real());
  }
  rep.alpha_log_slope = log_slope_or_nan(n_range, rep.alpha);
  rep.beta_log_slope = log_slope_or_nan(n_range, rep.beta);
  rep.reference_slope =
      beta * w0 + 4.0 * params.delta + beta * GibbsContext(h_e, beta).free_energy();
  rep.rate = erasure_rate(rho_ex, h_e, h_x, beta);
  rep.rate_condition = rep.rate < w0;
  rep.beta_strictly_decreasing = make_decay_report(n_range, rep.beta).strictly_decreasing;
  return rep;
}

// ---------------------------------------------------------------------------
// Coherence loss

std::pair<Vector, Vector> coherence_loss_states() {
  // Index e * 4 + x * 2 + r on E X Rbar.
  const double s = 1.0 / std::sqrt(2.0);
  Vector ghz = Vector::Zero(8), split = Vector::Zero(8);
  ghz(0) = s;
  ghz(7) = s;
  split(0) = s;
  split(5) = s;
  return {ghz, split};
}

std::vector<CoherenceLossRow> coherence_loss_experiment(const std::vector<int>& n_range,
                                                        double beta, double filter_radius,
                                                        double tol_w) {
  const auto [s1, s2] = coherence_loss_states();
  const Matrix zero = Matrix::Zero(2, 2);
  const std::vector<std::vector<double>> x_spectra = {{0.5, 0.5}, {1.0, 0.0}};
  std::vector<CoherenceLossRow> rows;
  for (int n : n_range) {
    Dims copy_dims;
    for (int i = 0; i < n; ++i) copy_dims.insert(copy_dims.end(), {2, 2, 2});
    Indices to_joint;
    for (int i = 0; i < n; ++i) to_joint.insert(to_joint.end(), {3 * i, 3 * i + 1});
    for (int i = 0; i < n; ++i) to_joint.push_back(3 * i + 2);
    const Dims dims = permuted_dims(copy_dims, to_joint);
    Indices e_first = e_sites(n);
    for (int s : x_sites(n)) e_first.push_back(s);
    for (int i = 0; i < n; ++i) e_first.push_back(2 * n + i);

    const int den = ipow(2, n);
    const int rest = ipow(4, n);
    auto env_matrix = [&](const Vector& psi) {
      const Vector v = permute_subsystems(psi, dims, e_first);
      return Matrix(Eigen::Map<const Matrix>(v.data(), rest, den));
    };
    const Vector psi1 = permute_subsystems(tensor_power(s1, n), copy_dims, to_joint);
    const Vector psi2 = permute_subsystems(tensor_power(s2, n), copy_dims, to_joint);

    const WorkValuePOVM povm = work_value_povm_EX(zero, zero, n, beta, tol_w);
    const Indices joint = range_indices(0, 2 * n);
    const std::vector<Vector> b1 = dephase_W_branches(psi1, dims, joint, povm);
    const std::vector<Vector> b2 = dephase_W_branches(psi2, dims, joint, povm);

    const Matrix undephased = env_matrix(psi1) * env_matrix(psi2).adjoint();
    Matrix dephased = Matrix::Zero(rest, rest);
    for (std::size_t w = 0; w < b1.size(); ++w)
      dephased.noalias() += env_matrix(b1[w]) * env_matrix(b2[w]).adjoint();

    // Typical-block filters on X^n, identity on Rbar^n.
    std::vector<Matrix> filters;
    for (const auto& spec : x_spectra) {
      Matrix f = Matrix::Zero(den, den);
      for (const YoungDiagram& mu : young_diagrams(n, 2)) {
        double dist = 0.0;
        for (int i = 0; i < 2; ++i) {
          const double row = i < mu.length() ? mu.rows[i] / static_cast<double>(n) : 0.0;
          dist += std::abs(row - spec[i]);
        }
        if (dist <= filter_radius) f += schur_weyl_projector(mu, n, 2).complex_projector();
      }
      filters.push_back(tensor(f, Matrix::Identity(den, den)));
    }

    CoherenceLossRow row;
    row.n = n;
    row.num_work_values = povm.size();
    row.undephased_norm = trace_norm(undephased);
    row.dephased_norm = trace_norm(dephased);
    row.undephased_filtered = trace_norm(filters[0] * undephased * filters[1]);
    row.dephased_filtered = trace_norm(filters[0] * dephased * filters[1]);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace thermoforge
