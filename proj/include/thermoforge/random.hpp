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

#include <cstdint>
#include <limits>

#include "thermoforge/qcore.hpp"

namespace thermoforge {

/// Counter-based generator: output i of stream (seed, stream) is a SplitMix64
/// hash of (seed, stream, i). Streams are independent and can be split
/// without coordination, so parallel consumers stay reproducible.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(mix(seed ^ mix(stream + 0x632be59bd9b4e019ULL))) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return mix(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

  /// Independent child stream.
  CounterRng split(std::uint64_t stream) const { return CounterRng(key_, stream); }

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }
  /// Standard normal via Box-Muller; consumes two outputs.
  double normal();

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Matrix of i.i.d. standard complex Gaussian entries.
Matrix ginibre(int rows, int cols, CounterRng& rng);
/// Haar-random unitary (QR of a Ginibre matrix with phase fix).
Matrix haar_unitary(int d, CounterRng& rng);
/// Hilbert-Schmidt-uniform density matrix.
Matrix random_density(int d, CounterRng& rng);
/// Random pure state vector.
Vector random_pure(int d, CounterRng& rng);
/// Random channel on C^d with `kraus_rank` Kraus operators (random Stinespring).
std::vector<Matrix> random_kraus(int d_in, int d_out, int kraus_rank, CounterRng& rng);
/// Random channel covariant under the single-site Hamiltonian h: each Kraus
/// operator moves energy by a definite amount.
std::vector<Matrix> random_covariant_kraus(const Matrix& h, CounterRng& rng,
                                           double tol = 1e-9);

}  // namespace thermoforge
