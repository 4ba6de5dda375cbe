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
#include "thermoforge/qcore.hpp"
#include "thermoforge/random.hpp"

namespace thermoforge {
namespace {

using testing::ket_bra;
using testing::max_abs;

// Loop-based oracle for tr_B on A (x) B.
Matrix trace_second(const Matrix& op, int da, int db) {
  Matrix out = Matrix::Zero(da, da);
  for (int i = 0; i < da; ++i)
    for (int j = 0; j < da; ++j)
      for (int k = 0; k < db; ++k) out(i, j) += op(i * db + k, j * db + k);
  return out;
}

Matrix trace_first(const Matrix& op, int da, int db) {
  Matrix out = Matrix::Zero(db, db);
  for (int i = 0; i < db; ++i)
    for (int j = 0; j < db; ++j)
      for (int k = 0; k < da; ++k) out(i, j) += op(k * db + i, k * db + j);
  return out;
}

TEST(Qcore, TensorMatchesIndexFormula) {
  CounterRng rng(1);
  Matrix a = ginibre(2, 2, rng), b = ginibre(3, 3, rng);
  Matrix t = tensor(a, b);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) EXPECT_EQ(t(i * 3 + k, j * 3 + l), a(i, j) * b(k, l));
}

TEST(Qcore, PartialTraceMatchesLoops) {
  CounterRng rng(2);
  Matrix rho = random_density(6, rng);
  EXPECT_LT(max_abs(partial_trace(rho, {2, 3}, {0}) - trace_second(rho, 2, 3)), 1e-14);
  EXPECT_LT(max_abs(partial_trace(rho, {2, 3}, {1}) - trace_first(rho, 2, 3)), 1e-14);
}

TEST(Qcore, PermuteSwapsFactors) {
  CounterRng rng(3);
  Matrix a = random_density(2, rng), b = random_density(3, rng);
  EXPECT_LT(max_abs(permute_subsystems(tensor(a, b), {2, 3}, {1, 0}) - tensor(b, a)), 1e-15);
  EXPECT_EQ(permuted_dims({2, 3, 4}, {2, 0, 1}), (Dims{4, 2, 3}));
}

TEST(Qcore, EmbedPlacesOperatorOnSite) {
  Matrix x = Matrix::Zero(2, 2);
  x(0, 1) = x(1, 0) = 1.0;
  Matrix e = embed(x, {2, 2, 2}, {1});
  Matrix expected = tensor(tensor(Matrix::Identity(2, 2), x), Matrix::Identity(2, 2));
  EXPECT_LT(max_abs(e - expected), 1e-15);
}

TEST(Qcore, DistancesAndEntropy) {
  Matrix p0 = ket_bra(2, 0, 0), p1 = ket_bra(2, 1, 1);
  Matrix mixed = Matrix::Identity(2, 2) / 2.0;
  EXPECT_NEAR(trace_distance(p0, p1), 1.0, 1e-14);
  EXPECT_NEAR(trace_distance(p0, mixed), 0.5, 1e-14);
  EXPECT_NEAR(fidelity(p0, mixed), 0.5, 1e-14);
  EXPECT_NEAR(von_neumann_entropy(mixed), std::log(2.0), 1e-14);
  EXPECT_NEAR(von_neumann_entropy(p0), 0.0, 1e-14);
  EXPECT_NEAR(trace_norm(ket_bra(2, 0, 1)), 1.0, 1e-14);
}

TEST(Qcore, DensityOperatorValidates) {
  Matrix bad = Matrix::Identity(2, 2);
  EXPECT_THROW(DensityOperator(bad, {2}), std::invalid_argument);
  DensityOperator ok = DensityOperator::maximally_mixed({2, 2});
  EXPECT_NEAR(ok.partial_trace({0}).matrix()(0, 0).real(), 0.5, 1e-15);
}

TEST(Qcore, ChoiOfIdentityIsMaximallyEntangled) {
  QuantumChannel id = QuantumChannel::identity({2});
  Vector omega = max_entangled(2);
  EXPECT_LT(max_abs(id.choi() - omega * omega.adjoint()), 1e-15);
}

TEST(Qcore, KrausAndChoiAgreeOnStates) {
  CounterRng rng(4);
  auto kraus = random_kraus(2, 3, 2, rng);
  QuantumChannel ch = QuantumChannel::from_kraus(kraus, {2}, {3});
  Matrix rho = random_density(2, rng);
  Matrix direct = Matrix::Zero(3, 3);
  for (const Matrix& k : kraus) direct += k * rho * k.adjoint();
  EXPECT_LT(max_abs(ch(rho) - direct), 1e-14);

  ChannelViews views = channel_views(ch);
  QuantumChannel rebuilt = QuantumChannel::from_kraus(views.kraus, {2}, {3});
  EXPECT_LT(max_abs(rebuilt.choi() - ch.choi()), 1e-12);
  const Matrix& v = views.stinespring.matrix();
  EXPECT_LT(max_abs(v.adjoint() * v - Matrix::Identity(2, 2)), 1e-12);
}

TEST(Qcore, RejectsNonTracePreserving) {
  EXPECT_THROW(QuantumChannel::from_kraus({2.0 * Matrix::Identity(2, 2)}, {2}, {2}),
               std::invalid_argument);
}

TEST(Qcore, ApplyChannelOnSubsystem) {
  CounterRng rng(6);
  Matrix a = random_density(2, rng), b = random_density(2, rng);
  QuantumChannel flip = QuantumChannel::unitary(ket_bra(2, 0, 1) + ket_bra(2, 1, 0), {2});
  Matrix out = apply_channel(flip, tensor(a, b), {2, 2}, {1});
  EXPECT_LT(max_abs(out - tensor(a, flip(b))), 1e-14);
}

TEST(Qcore, TensorPowerOfChannel) {
  QuantumChannel th = testing::thermalizer(testing::diag2(0.0, 1.0), 1.0);
  QuantumChannel th2 = th.tensor_power(2);
  CounterRng rng(8);
  Matrix rho = random_density(4, rng);
  Matrix g = th(ket_bra(2, 0, 0));
  EXPECT_LT(max_abs(th2(rho) - tensor(g, g)), 1e-14);
}

}  // namespace
}  // namespace thermoforge
