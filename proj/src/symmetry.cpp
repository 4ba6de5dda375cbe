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

#include "thermoforge/symmetry.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <tuple>

#include "thermoforge/kernels.hpp"

namespace thermoforge {

int YoungDiagram::size() const { return std::accumulate(rows.begin(), rows.end(), 0); }

double YoungDiagram::entropy() const {
  const double n = size();
  double s = 0.0;
  for (int r : rows)
    if (r > 0) s -= (r / n) * std::log(r / n);
  return s;
}

std::string YoungDiagram::to_string() const {
  std::string s = "(";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(rows[i]);
  }
  return s + ")";
}

namespace {

void partitions_into(int remaining, int max_part, int rows_left, std::vector<int>& current,
                     std::vector<YoungDiagram>& out) {
  if (remaining == 0) {
    out.push_back({current});
    return;
  }
  if (rows_left == 0) return;
  for (int p = std::min(remaining, max_part); p >= 1; --p) {
    current.push_back(p);
    partitions_into(remaining - p, p, rows_left - 1, current, out);
    current.pop_back();
  }
}

std::vector<int> to_beta_set(const std::vector<int>& rows) {
  const int l = static_cast<int>(rows.size());
  std::vector<int> beta(l);
  for (int i = 0; i < l; ++i) beta[i] = rows[i] + (l - 1 - i);
  return beta;
}

std::vector<int> from_beta_set(std::vector<int> beta) {
  std::sort(beta.begin(), beta.end(), std::greater<int>());
  const int l = static_cast<int>(beta.size());
  std::vector<int> rows;
  for (int i = 0; i < l; ++i) {
    const int r = beta[i] - (l - 1 - i);
    if (r > 0) rows.push_back(r);
  }
  return rows;
}

using CharKey = std::pair<std::vector<int>, std::vector<int>>;

std::int64_t mn_character(const std::vector<int>& rows, const std::vector<int>& cls,
                          std::map<CharKey, std::int64_t>& memo) {
  if (cls.empty()) return rows.empty() ? 1 : 0;
  CharKey key{rows, cls};
  if (auto it = memo.find(key); it != memo.end()) return it->second;
  const int r = cls.front();
  const std::vector<int> rest(cls.begin() + 1, cls.end());
  const std::vector<int> beta = to_beta_set(rows);
  std::int64_t total = 0;
  for (std::size_t b = 0; b < beta.size(); ++b) {
    const int target = beta[b] - r;
    if (target < 0) continue;
    if (std::find(beta.begin(), beta.end(), target) != beta.end()) continue;
    int between = 0;
    for (int c : beta)
      if (c > target && c < beta[b]) ++between;
    std::vector<int> moved = beta;
    moved[b] = target;
    const std::int64_t sub = mn_character(from_beta_set(moved), rest, memo);
    total += (between % 2 == 0 ? 1 : -1) * sub;
  }
  memo.emplace(std::move(key), total);
  return total;
}

std::mutex& symmetry_mutex() {
  static std::mutex m;
  return m;
}

std::map<CharKey, std::int64_t>& character_memo() {
  static std::map<CharKey, std::int64_t> memo;
  return memo;
}

// Character-sum coefficients (f/n!) chi(pi) for every permutation of n.
struct ProjectorTerms {
  std::vector<std::vector<int>> perms;
  std::vector<double> coeffs;
};

ProjectorTerms projector_terms(const YoungDiagram& lambda, int n) {
  if (lambda.size() != n) throw std::invalid_argument("schur_weyl_projector: |lambda| != n");
  ProjectorTerms t;
  t.perms = all_permutations(n);
  const double f = static_cast<double>(irrep_dimension(lambda));
  double fact = 1.0;
  for (int i = 2; i <= n; ++i) fact *= i;
  std::map<CycleType, double> by_class;
  t.coeffs.reserve(t.perms.size());
  for (const auto& p : t.perms) {
    const CycleType ct = cycle_type(p);
    auto it = by_class.find(ct);
    if (it == by_class.end())
      it = by_class.emplace(ct, f / fact * static_cast<double>(character(lambda, ct))).first;
    t.coeffs.push_back(it->second);
  }
  return t;
}

}  // namespace

std::vector<YoungDiagram> young_diagrams(int n, int d) {
  if (n < 1 || d < 1) throw std::invalid_argument("young_diagrams: n and d must be positive");
  std::vector<YoungDiagram> out;
  std::vector<int> current;
  partitions_into(n, n, d, current, out);
  return out;
}

CycleType cycle_type(const std::vector<int>& perm) {
  const int n = static_cast<int>(perm.size());
  std::vector<bool> seen(n, false);
  CycleType ct;
  for (int s = 0; s < n; ++s) {
    if (seen[s]) continue;
    int len = 0;
    for (int k = s; !seen[k]; k = perm[k]) {
      seen[k] = true;
      ++len;
    }
    ct.push_back(len);
  }
  std::sort(ct.begin(), ct.end(), std::greater<int>());
  return ct;
}

std::int64_t character(const YoungDiagram& lambda, const CycleType& cls) {
  if (lambda.size() != std::accumulate(cls.begin(), cls.end(), 0))
    throw std::invalid_argument("character: |lambda| != |class|");
  std::lock_guard<std::mutex> lock(symmetry_mutex());
  return mn_character(lambda.rows, cls, character_memo());
}

std::int64_t irrep_dimension(const YoungDiagram& lambda) {
  return character(lambda, CycleType(lambda.size(), 1));
}

Matrix SparsePermutation::to_dense() const {
  const int d = static_cast<int>(target.size());
  Matrix m = Matrix::Zero(d, d);
  for (int c = 0; c < d; ++c) m(target[c], c) = 1.0;
  return m;
}

SparsePermutation SparsePermutation::compose(const SparsePermutation& right) const {
  SparsePermutation out;
  out.target.resize(right.target.size());
  for (std::size_t c = 0; c < right.target.size(); ++c) out.target[c] = target[right.target[c]];
  return out;
}

double SparsePermutation::trace() const {
  double t = 0.0;
  for (std::size_t c = 0; c < target.size(); ++c) t += (target[c] == static_cast<int>(c));
  return t;
}

SparsePermutation permutation_operator(const std::vector<int>& pi, int d) {
  const int n = static_cast<int>(pi.size());
  int total = 1;
  for (int i = 0; i < n; ++i) total *= d;
  SparsePermutation p;
  p.target.resize(total);
  std::vector<int> digits(n), moved(n);
  for (int c = 0; c < total; ++c) {
    int r = c;
    for (int k = n - 1; k >= 0; --k) {
      digits[k] = r % d;
      r /= d;
    }
    for (int k = 0; k < n; ++k) moved[pi[k]] = digits[k];
    int t = 0;
    for (int k = 0; k < n; ++k) t = t * d + moved[k];
    p.target[c] = t;
  }
  return p;
}

std::vector<std::vector<int>> all_permutations(int n) {
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  std::vector<std::vector<int>> out;
  do {
    out.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  return out;
}

SchurWeylBlock schur_weyl_projector(const YoungDiagram& lambda, int n, int d) {
  if (lambda.length() > d) throw std::invalid_argument("schur_weyl_projector: too many rows");
  using Key = std::tuple<std::vector<int>, int, int>;
  static std::map<Key, std::shared_ptr<const RealMatrix>> cache;
  const Key key{lambda.rows, n, d};
  {
    std::lock_guard<std::mutex> lock(symmetry_mutex());
    if (auto it = cache.find(key); it != cache.end()) return {lambda, n, d, it->second};
  }
  const ProjectorTerms t = projector_terms(lambda, n);
  auto proj = std::make_shared<const RealMatrix>(kernels::permutation_sum(t.perms, t.coeffs, d));
  std::lock_guard<std::mutex> lock(symmetry_mutex());
  auto it = cache.emplace(key, std::move(proj)).first;
  return {lambda, n, d, it->second};
}

RealMatrix schur_weyl_projector_serial(const YoungDiagram& lambda, int n, int d) {
  if (lambda.length() > d) throw std::invalid_argument("schur_weyl_projector: too many rows");
  const ProjectorTerms t = projector_terms(lambda, n);
  return kernels::permutation_sum_serial(t.perms, t.coeffs, d);
}

std::map<YoungDiagram, double> spectrum_estimate_distribution(const Matrix& rho, int n) {
  const int d = static_cast<int>(rho.rows());
  // tr[P(pi) rho^{(x)n}] is the product over cycles of tr(rho^len).
  std::vector<double> power_sums(n + 1, 0.0);
  Matrix power = Matrix::Identity(d, d);
  for (int k = 1; k <= n; ++k) {
    power = power * rho;
    power_sums[k] = power.trace().real();
  }
  std::map<CycleType, int> class_sizes;
  for (const auto& p : all_permutations(n)) ++class_sizes[cycle_type(p)];
  double fact = 1.0;
  for (int i = 2; i <= n; ++i) fact *= i;
  std::map<YoungDiagram, double> out;
  for (const YoungDiagram& lambda : young_diagrams(n, d)) {
    const double f = static_cast<double>(irrep_dimension(lambda));
    double s = 0.0;
    for (const auto& [ct, size] : class_sizes) {
      double tr = 1.0;
      for (int len : ct) tr *= power_sums[len];
      s += size * static_cast<double>(character(lambda, ct)) * tr;
    }
    out[lambda] = f / fact * s;
  }
  return out;
}

}  // namespace thermoforge
