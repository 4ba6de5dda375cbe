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
#include "thermoforge/covariant.hpp"
#include "thermoforge/random.hpp"

namespace thermoforge {
namespace {

using testing::diag2;
using testing::max_abs;

Matrix hadamard() {
  Matrix h(2, 2);
  h << 1.0, 1.0, 1.0, -1.0;
  return h / std::sqrt(2.0);
}

TEST(Covariant, DetectsCovariance) {
  const Matrix h = diag2(0.0, 1.0);
  EXPECT_TRUE(is_time_covariant(testing::relaxation(1.0, 1.0, 0.3), h).covariant);
  EXPECT_TRUE(is_time_covariant(testing::energy_dephasing(), h).covariant);
  CovarianceReport r = is_time_covariant(QuantumChannel::unitary(hadamard(), {2}), h);
  EXPECT_FALSE(r.covariant);
  EXPECT_GT(r.deviation, 0.1);
}

TEST(Covariant, SampledDeviationAgrees) {
  const Matrix h = diag2(0.0, 1.0);
  const std::vector<double> times{0.3, 1.1, 2.7};
  EXPECT_LT(sampled_time_covariance_deviation(testing::relaxation(1.0, 1.0, 0.3), h, times),
            1e-12);
  EXPECT_GT(sampled_time_covariance_deviation(QuantumChannel::unitary(hadamard(), {2}), h, times),
            1e-3);
}

TEST(Covariant, RandomCovariantKrausIsCovariant) {
  CounterRng rng(41);
  const Matrix h = diag2(0.0, 1.0);
  for (int t = 0; t < 5; ++t) {
    auto k = random_covariant_kraus(h, rng);
    QuantumChannel ch = QuantumChannel::from_kraus(k, {2}, {2});
    EXPECT_LT(is_time_covariant(ch, h).deviation, 1e-10);
  }
}

TEST(Covariant, DilationReconstructsAndConservesEnergy) {
  CounterRng rng(42);
  const Matrix h = diag2(0.0, 1.0);
  std::vector<QuantumChannel> channels{QuantumChannel::identity({2}), testing::energy_dephasing(),
                                       testing::thermalizer(h, 1.0),
                                       testing::relaxation(1.0, 0.5, 0.8)};
  channels.push_back(QuantumChannel::from_kraus(random_covariant_kraus(h, rng), {2}, {2}));
  for (const auto& ch : channels) {
    CovariantDilation dil = covariant_dilation(ch, h);
    EXPECT_LT(max_abs(dil.channel().choi() - ch.choi()), 1e-9);
    EXPECT_LT(dil.energy_conservation_error(), 1e-9);
    EXPECT_EQ(dil.h_env(dil.zero_level_index), 0.0);
    EXPECT_LT(max_abs(dil.v.adjoint() * dil.v - Matrix::Identity(2, 2)), 1e-10);
    Matrix u = extend_to_unitary(dil);
    EXPECT_LT(max_abs(u.adjoint() * u - Matrix::Identity(u.rows(), u.cols())), 1e-9);
    const Matrix htot = dil.total_hamiltonian();
    EXPECT_LT(max_abs(u * htot - htot * u), 1e-9);
  }
}

TEST(Covariant, ThermalizerAtZeroHamiltonianUsesFiveLevels) {
  CovariantDilation dil = covariant_dilation(testing::thermalizer(Matrix::Zero(2, 2), 1.0),
                                             Matrix::Zero(2, 2));
  EXPECT_EQ(dil.env_dim(), 5);
}

TEST(Covariant, DilationRejectsNonCovariantChannels) {
  EXPECT_THROW(covariant_dilation(QuantumChannel::unitary(hadamard(), {2}), diag2(0.0, 1.0)),
               std::invalid_argument);
}

}  // namespace
}  // namespace thermoforge
