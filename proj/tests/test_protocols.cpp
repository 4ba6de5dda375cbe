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

#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>

#include "test_util.hpp"
#include "thermoforge/protocols.hpp"
#include "thermoforge/random.hpp"

namespace thermoforge {
namespace {

using testing::all_sites;
using testing::diag2;
using testing::ket_bra;
using testing::max_abs;

// Entropy from a plain eigensolver, kept apart from the library.
double entropy_oracle(const Matrix& rho) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho);
  double s = 0.0;
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    const double p = es.eigenvalues()(i);
    if (p > 1e-14) s -= p * std::log(p);
  }
  return s;
}

// Erasure work rate: F_X-side minus F_EX-side plus F_E, with free energies
// tr(H rho) - S / beta and log-partition terms cancelling against F_E.
double erasure_rate_oracle(const Matrix& rho_ex, const Matrix& h_e, const Matrix& h_x,
                           double beta) {
  const Matrix i2 = Matrix::Identity(2, 2);
  const Matrix h_ex = tensor(h_e, i2) + tensor(i2, h_x);
  Matrix rho_x = Matrix::Zero(2, 2);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int e = 0; e < 2; ++e) rho_x(a, b) += rho_ex(e * 2 + a, e * 2 + b);
  const double f_x = (h_x * rho_x).trace().real() - entropy_oracle(rho_x) / beta;
  const double f_ex = (h_ex * rho_ex).trace().real() - entropy_oracle(rho_ex) / beta;
  const double z_e = std::exp(-beta * h_e(0, 0).real()) + std::exp(-beta * h_e(1, 1).real());
  return f_x - f_ex - std::log(z_e) / beta;
}

TEST(Protocols, ParamsValidate) {
  ProtocolParams p;
  EXPECT_NO_THROW(p.validate());
  p.delta = -1.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(Protocols, WorkDistributionSummaries) {
  WorkDistribution d{{-1.0, 0.0, 2.0}, {0.25, 0.5, 0.25}};
  EXPECT_DOUBLE_EQ(d.total(), 1.0);
  EXPECT_DOUBLE_EQ(d.mean(), 0.25);
  EXPECT_DOUBLE_EQ(d.max_support(), 2.0);
  EXPECT_DOUBLE_EQ(d.mass_within(0.0, 1.0), 0.75);
}

TEST(Protocols, DecayReportOfGeometricSequence) {
  DecayReport r = make_decay_report({1, 2, 3}, {1.0, 0.5, 0.25});
  EXPECT_NEAR(r.log_slope, -std::log(2.0), 1e-14);
  EXPECT_NEAR(r.rate, std::log(2.0), 1e-14);
  EXPECT_TRUE(r.strictly_decreasing);
  EXPECT_FALSE(r.nondecreasing);
  EXPECT_TRUE(std::isnan(make_decay_report({1, 2}, {1.0, 0.0}).log_slope));
}

TEST(Protocols, EstimatorOutcomesOnPureState) {
  auto outcomes = free_energy_outcomes(ket_bra(2, 0, 0), diag2(0.0, 1.0), 1.0, 3);
  ASSERT_EQ(outcomes.size(), 1u);
  EXPECT_NEAR(outcomes[0].probability, 1.0, 1e-12);
  EXPECT_NEAR(outcomes[0].estimate, 0.0, 1e-12);
}

TEST(Protocols, EstimatorIsDeterministicAndNormalized) {
  CounterRng rng(61);
  Matrix rho = random_density(2, rng);
  double total = 0.0;
  for (const auto& o : free_energy_outcomes(rho, diag2(0.0, 1.0), 1.0, 4)) total += o.probability;
  EXPECT_NEAR(total, 1.0, 1e-12);
  EstimatorStats a = free_energy_estimator(rho, diag2(0.0, 1.0), 1.0, 4, 200, 9);
  EstimatorStats b = free_energy_estimator(rho, diag2(0.0, 1.0), 1.0, 4, 200, 9);
  EXPECT_EQ(a.samples, b.samples);
  EXPECT_NEAR(a.target, (diag2(0.0, 1.0) * rho).trace().real() - entropy_oracle(rho), 1e-12);
}

TEST(Protocols, ErasureRateMatchesOracle) {
  const Matrix he = diag2(0.0, 1.0), hx = diag2(0.0, 0.5);
  const double beta = 1.2;
  CounterRng rng(62);
  for (int t = 0; t < 3; ++t) {
    Matrix rho = random_density(4, rng);
    EXPECT_NEAR(erasure_rate(rho, he, hx, beta), erasure_rate_oracle(rho, he, hx, beta), 1e-12);
  }
  EXPECT_NEAR(erasure_rate(testing::classically_correlated(), Matrix::Zero(2, 2),
                           Matrix::Zero(2, 2), 1.0),
              -std::log(2.0), 1e-12);
}

TEST(Protocols, EnvironmentAttachAndTraceRoundTrip) {
  CounterRng rng(63);
  ErasureSetup setup{diag2(0.0, 1.0), diag2(0.0, 0.5), 1.0, 2, 2};
  Matrix rho_xr = random_density(8, rng);
  Matrix full = attach_thermal_environment(rho_xr, setup);
  EXPECT_EQ(full.rows(), 32);
  EXPECT_LT(max_abs(trace_environment(full, setup) - rho_xr), 1e-14);
}

TEST(Protocols, SemiuniversalErasureResetsEnvironment) {
  const Matrix h0 = Matrix::Zero(2, 2);
  ErasureSetup setup{h0, h0, 1.0, 2, 1};
  ProtocolParams params;
  params.n = 2;
  Matrix rho = tensor_power(testing::classically_correlated(), 2);
  SemiuniversalResult r = semiuniversal_erasure(rho, setup, 0.0, params);
  EXPECT_GT(r.accepted, 0.0);
  EXPECT_LE(r.accepted, 1.0 + 1e-12);
  Matrix env = partial_trace(r.output, setup.dims(), e_sites(2));
  EXPECT_LT(max_abs(env - Matrix::Identity(4, 4) / 4.0), 1e-12);
  // n (w0 + 5 delta / beta + F_E) + log 2 / beta
  EXPECT_NEAR(r.ledger.total(), 2.0 * (0.25 - std::log(2.0)) + std::log(2.0), 1e-12);
  EXPECT_THROW(semiuniversal_erasure(rho, setup, -10.0, params), std::domain_error);
}

TEST(Protocols, VariableErasureHitsDephasedTarget) {
  ErasureSetup setup{diag2(0.0, 1.0), diag2(0.0, 1.0), 1.0, 2, 1};
  ProtocolParams params;
  params.n = 2;
  CounterRng rng(64);
  Matrix rho = tensor_power(random_density(4, rng), 2);
  VariableErasureResult r = variable_work_erasure(rho, setup, params);
  EXPECT_LT(r.target_distance, 1e-9);
  EXPECT_NEAR(r.outcomes.total(), 1.0, 1e-10);
  EXPECT_NEAR(r.output.trace().real(), 1.0, 1e-10);
}

TEST(Protocols, ProcessOnThermalizerExtractsLogTwo) {
  ProtocolParams params;
  for (int n = 1; n <= 2; ++n) {
    params.n = n;
    VariableProcessResult r = variable_work_process_iid(
        testing::thermalizer(Matrix::Zero(2, 2), 1.0), Matrix::Zero(2, 2), ket_bra(2, 0, 0), 1.0,
        params);
    ASSERT_TRUE(r.target.has_value());
    EXPECT_NEAR(*r.target, -std::log(2.0), 1e-9);
    EXPECT_LT(r.dephased_distance, 1e-9);
  }
}

TEST(Protocols, ProcessRejectsNonCovariantChannel) {
  Matrix had(2, 2);
  had << 1.0, 1.0, 1.0, -1.0;
  ProtocolParams params;
  EXPECT_THROW(variable_work_process_iid(QuantumChannel::unitary(had / std::sqrt(2.0), {2}),
                                         diag2(0.0, 1.0), ket_bra(2, 0, 0), 1.0, params),
               std::invalid_argument);
}

TEST(Protocols, GpmOnRandomChannel) {
  CounterRng rng(65);
  QuantumChannel ch = QuantumChannel::from_kraus(random_kraus(2, 2, 2, rng), {2}, {2});
  GpmReport g = gpm_variable_map(ch, diag2(0.0, 1.0), 1, 1.0);
  EXPECT_LT(g.completeness_error, 1e-9);
  EXPECT_LE(g.max_operator_norm, 1.0 + 1e-9);
  EXPECT_GE(g.gibbs_min_eigenvalue, -1e-9);
  EXPECT_LT(g.trace_preservation_error, 1e-9);
  EXPECT_LE(g.required_slack, g.slack + 1e-12);
}

TEST(Protocols, GpmOfCovariantChannelIsTheDephasedChannel) {
  const Matrix h = diag2(0.0, 1.0);
  QuantumChannel th = testing::thermalizer(h, 1.0);
  GpmReport g = gpm_variable_map(th, h, 2, 1.0);
  EXPECT_LT(max_abs(g.choi - dephased_channel(th, h, 2, 1.0).choi_dephased), 1e-9);
}

TEST(Protocols, HypothesisTestOnCorrelatedPair) {
  const Matrix h0 = Matrix::Zero(2, 2);
  ProtocolParams params;
  HypothesisTestReport r =
      hypothesis_test_exponents(testing::classically_correlated(), h0, h0, 1.0, 0.0, params,
                                {1, 2, 3, 4});
  EXPECT_TRUE(r.beta_strictly_decreasing);
  EXPECT_LE(r.beta_log_slope, -0.1);
  for (double a : r.alpha) EXPECT_GT(a, 0.5);
}

// Independent two-copy oracle: at zero Hamiltonians the work-value blocks are
// products of symmetric/antisymmetric projectors on the EX pair and X pair.
double two_copy_dephased_norm() {
  auto [s1, s2] = coherence_loss_states();
  // Sites: E1 X1 R1 E2 X2 R2 R'.
  const Dims dims{2, 2, 2, 2, 2, 2, 2};
  Vector psi = (tensor(tensor(s1, s1), Vector::Unit(2, 0)) +
                tensor(tensor(s2, s2), Vector::Unit(2, 1))) / std::sqrt(2.0);
  // Swap operators on the (E,X) pair and on X alone, acting on E1 X1 E2 X2.
  Matrix swap_ex = Matrix::Zero(16, 16), swap_x = Matrix::Zero(16, 16);
  for (int e1 = 0; e1 < 2; ++e1)
    for (int x1 = 0; x1 < 2; ++x1)
      for (int e2 = 0; e2 < 2; ++e2)
        for (int x2 = 0; x2 < 2; ++x2) {
          const int from = ((e1 * 2 + x1) * 2 + e2) * 2 + x2;
          swap_ex(((e2 * 2 + x2) * 2 + e1) * 2 + x1, from) = 1.0;
          swap_x(((e1 * 2 + x2) * 2 + e2) * 2 + x1, from) = 1.0;
        }
  const Matrix id = Matrix::Identity(16, 16);
  const Matrix sym_ex = (id + swap_ex) / 2.0, anti_ex = (id - swap_ex) / 2.0;
  const Matrix sym_x = (id + swap_x) / 2.0, anti_x = (id - swap_x) / 2.0;
  const std::vector<Matrix> blocks{sym_ex * sym_x + anti_ex * anti_x, anti_ex * sym_x,
                                   sym_ex * anti_x};
  const Matrix rho = psi * psi.adjoint();
  Matrix dephased = Matrix::Zero(rho.rows(), rho.cols());
  for (const Matrix& p : blocks) {
    const Matrix big = embed(p, dims, {0, 1, 3, 4});
    dephased += big * rho * big;
  }
  const Matrix marg = partial_trace(dephased, dims, {1, 2, 4, 5, 6});  // X1 R1 X2 R2 R'
  Matrix block(16, 16);
  for (int a = 0; a < 16; ++a)
    for (int b = 0; b < 16; ++b) block(a, b) = marg(a * 2 + 0, b * 2 + 1);
  return 2.0 * trace_norm(block);
}

TEST(Protocols, CoherenceLossMatchesTwoCopyOracle) {
  auto rows = coherence_loss_experiment({1, 2}, 1.0);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_NEAR(rows[0].undephased_norm, 1.0, 1e-10);
  EXPECT_NEAR(rows[0].dephased_norm, 1.0, 1e-10);
  EXPECT_NEAR(rows[1].undephased_norm, 1.0, 1e-10);
  EXPECT_NEAR(rows[1].dephased_norm, two_copy_dephased_norm(), 1e-10);
  EXPECT_LT(rows[1].dephased_norm, 1.0 - 1e-3);
}

TEST(Protocols, CoherenceLossSingleCopyStates) {
  auto [s1, s2] = coherence_loss_states();
  const Dims dims{2, 2, 2};
  Matrix ex1 = partial_trace(s1 * s1.adjoint(), dims, {0, 1});
  Matrix ex2 = partial_trace(s2 * s2.adjoint(), dims, {0, 1});
  for (const Matrix* m : {&ex1, &ex2}) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(*m);
    RealVector ev = es.eigenvalues().reverse();
    EXPECT_NEAR(ev(0), 0.5, 1e-15);
    EXPECT_NEAR(ev(1), 0.5, 1e-15);
    EXPECT_NEAR(ev(2), 0.0, 1e-15);
  }
  EXPECT_NEAR(trace_norm(partial_trace(s1 * s2.adjoint(), dims, {1, 2})), 1.0, 1e-12);
}

}  // namespace
}  // namespace thermoforge
