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

#include "thermoforge/workblocks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "thermoforge/kernels.hpp"
#include "thermoforge/symmetry.hpp"

namespace thermoforge {

namespace {

constexpr double kCommuteTol = 1e-9;
constexpr double kZeroElement = 1e-8;

int ipow(int base, int exp) {
  int r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

struct SiteSpectrum {
  RealVector energies;
  Matrix basis;
  bool diagonal = true;
};

// Diagonal Hamiltonians keep the computational basis, so no rotation is needed.
SiteSpectrum site_spectrum(const Matrix& h) {
  if (h.rows() != h.cols()) throw std::invalid_argument("Hamiltonian must be square");
  if ((h - h.adjoint()).cwiseAbs().maxCoeff() > kHermitianTol)
    throw std::invalid_argument("Hamiltonian is not Hermitian");
  const int d = static_cast<int>(h.rows());
  Matrix off = h;
  off.diagonal().setZero();
  if (off.cwiseAbs().maxCoeff() == 0.0)
    return {h.diagonal().real(), Matrix::Identity(d, d), true};
  const EigenSystem es = eigh(h);
  return {es.values, es.vectors, false};
}

// Total energy of every basis index of (C^d)^{(x)n} for site energies e.
std::vector<double> total_energies(const RealVector& e, int n) {
  const int d = static_cast<int>(e.size());
  const int total = ipow(d, n);
  std::vector<double> out(total);
  for (int b = 0; b < total; ++b) {
    int r = b;
    double s = 0.0;
    for (int k = 0; k < n; ++k) {
      s += e(r % d);
      r /= d;
    }
    out[b] = s;
  }
  return out;
}

double free_energy_estimate(double energy, int n, const YoungDiagram& lambda, double beta) {
  return energy / n - lambda.entropy() / beta;
}

Matrix left_apply_last(const Matrix& p, const Matrix& x) {
  const Eigen::Index d = p.rows();
  const Eigen::Index cols = (x.rows() / d) * x.cols();
  Matrix out(x.rows(), x.cols());
  Eigen::Map<const Matrix> xm(x.data(), d, cols);
  Eigen::Map<Matrix> om(out.data(), d, cols);
  om.noalias() = p * xm;
  return out;
}

Indices move_to_back(const Dims& dims, const Indices& on) {
  const int k = static_cast<int>(dims.size());
  std::vector<bool> used(k, false);
  for (int i : on) {
    if (i < 0 || i >= k || used[i]) throw std::invalid_argument("dephase_W: bad index set");
    used[i] = true;
  }
  Indices order;
  for (int i = 0; i < k; ++i)
    if (!used[i]) order.push_back(i);
  order.insert(order.end(), on.begin(), on.end());
  return order;
}

Indices inverse(const Indices& order) {
  Indices inv(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) inv[order[i]] = static_cast<int>(i);
  return inv;
}

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

void check_commute(const Matrix& a, const Matrix& b, const char* what) {
  if (max_abs(a * b - b * a) > kCommuteTol)
    throw std::logic_error(std::string("work-value factors do not commute: ") + what);
}

// Drops (near-)zero elements and returns a POVM sorted by value.
WorkValuePOVM finalize(std::vector<double> values, std::vector<Matrix> elements, Dims dims,
                       WorkValuePOVM::Kind kind) {
  WorkValuePOVM povm;
  povm.kind = kind;
  povm.dims = std::move(dims);
  std::vector<int> idx(values.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return values[a] < values[b]; });
  for (int i : idx) {
    if (elements[i].norm() <= kZeroElement) continue;
    povm.values.push_back(values[i]);
    povm.elements.push_back(std::move(elements[i]));
  }
  return povm;
}

Matrix embed_x_sites(const Matrix& op_x, int d_e, int d_x, int n) {
  return embed(op_x, interleaved_dims(d_e, d_x, n), x_sites(n));
}

}  // namespace

Dims interleaved_dims(int d_e, int d_x, int n) {
  Dims dims;
  for (int i = 0; i < n; ++i) {
    dims.push_back(d_e);
    dims.push_back(d_x);
  }
  return dims;
}

Indices x_sites(int n) {
  Indices s;
  for (int i = 0; i < n; ++i) s.push_back(2 * i + 1);
  return s;
}

Indices e_sites(int n) {
  Indices s;
  for (int i = 0; i < n; ++i) s.push_back(2 * i);
  return s;
}

std::pair<std::vector<double>, std::vector<int>> quantize_work_values(
    const std::vector<double>& raw, double tol) {
  std::vector<int> idx(raw.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return raw[a] < raw[b]; });
  std::vector<double> reps;
  std::vector<int> assign(raw.size(), -1);
  double last = 0.0, sum = 0.0;
  int count = 0;
  for (int i : idx) {
    if (count > 0 && raw[i] - last > tol) {
      reps.push_back(sum / count);
      sum = 0.0;
      count = 0;
    }
    assign[i] = static_cast<int>(reps.size());
    sum += raw[i];
    ++count;
    last = raw[i];
  }
  if (count > 0) reps.push_back(sum / count);
  return {reps, assign};
}

EnergyBlockFamily energy_blocks(const Matrix& h_site, int n, double tol) {
  if (n < 1) throw std::invalid_argument("energy_blocks: n must be positive");
  const SiteSpectrum sp = site_spectrum(h_site);
  const int d = static_cast<int>(h_site.rows());
  const std::vector<double> totals = total_energies(sp.energies, n);
  auto [reps, assign] = quantize_work_values(totals, tol);
  const int total = static_cast<int>(totals.size());
  EnergyBlockFamily fam;
  fam.dims = Dims(n, d);
  fam.energies = reps;
  const Matrix basis = sp.diagonal ? Matrix() : tensor_power(sp.basis, n);
  for (std::size_t k = 0; k < reps.size(); ++k) {
    std::vector<int> members;
    for (int b = 0; b < total; ++b)
      if (assign[b] == static_cast<int>(k)) members.push_back(b);
    if (sp.diagonal) {
      Matrix p = Matrix::Zero(total, total);
      for (int b : members) p(b, b) = 1.0;
      fam.projectors.push_back(std::move(p));
    } else {
      Matrix cols(total, static_cast<int>(members.size()));
      for (std::size_t c = 0; c < members.size(); ++c) cols.col(c) = basis.col(members[c]);
      fam.projectors.push_back(cols * cols.adjoint());
    }
  }
  return fam;
}

// ---------------------------------------------------------------------------
// WorkValuePOVM

double WorkValuePOVM::completeness_error() const {
  if (elements.empty()) return std::numeric_limits<double>::infinity();
  const Eigen::Index d = elements.front().cols();
  Matrix sum = Matrix::Zero(d, d);
  for (const Matrix& m : elements) {
    if (kind == Kind::kProjective)
      sum += m;
    else
      sum += m.adjoint() * m;
  }
  return max_abs(sum - Matrix::Identity(d, d));
}

double WorkValuePOVM::projector_error() const {
  double err = 0.0;
  for (std::size_t v = 0; v < elements.size(); ++v) {
    err = std::max(err, max_abs(elements[v] - elements[v].adjoint()));
    for (std::size_t w = v; w < elements.size(); ++w) {
      const Matrix prod = elements[v] * elements[w];
      err = std::max(err, v == w ? max_abs(prod - elements[v]) : max_abs(prod));
    }
  }
  return err;
}

Matrix WorkValuePOVM::at_most(double threshold) const {
  if (elements.empty()) throw std::logic_error("at_most: empty POVM");
  Matrix sum = Matrix::Zero(elements.front().rows(), elements.front().cols());
  for (std::size_t i = 0; i < elements.size(); ++i)
    if (values[i] <= threshold) sum += elements[i];
  return sum;
}

// ---------------------------------------------------------------------------
// Erasure measurement

WorkValuePOVM work_value_povm_EX(const Matrix& h_e, const Matrix& h_x, int n, double beta,
                                 double tol_w) {
  if (n < 1 || !(beta > 0.0)) throw std::invalid_argument("work_value_povm_EX: bad n or beta");
  const SiteSpectrum se = site_spectrum(h_e);
  const SiteSpectrum sx = site_spectrum(h_x);
  const int de = static_cast<int>(h_e.rows());
  const int dx = static_cast<int>(h_x.rows());
  const int d = de * dx;
  const int total = ipow(d, n);

  // Work in the product eigenbasis, where both energy families are diagonal.
  RealVector e_joint(d), e_x(d);
  for (int a = 0; a < de; ++a)
    for (int x = 0; x < dx; ++x) {
      e_joint(a * dx + x) = se.energies(a) + sx.energies(x);
      e_x(a * dx + x) = sx.energies(x);
    }
  const auto [k_reps, k_of] = quantize_work_values(total_energies(e_joint, n), tol_w);
  const auto [l_reps, l_of] = quantize_work_values(total_energies(e_x, n), tol_w);
  const int nk = static_cast<int>(k_reps.size());
  const int nl = static_cast<int>(l_reps.size());

  const std::vector<YoungDiagram> lambdas = young_diagrams(n, d);
  const std::vector<YoungDiagram> mus = young_diagrams(n, dx);
  const int nlam = static_cast<int>(lambdas.size());
  const int nmu = static_cast<int>(mus.size());

  std::vector<bool> pair_present(nk * nl, false);
  for (int b = 0; b < total; ++b) pair_present[k_of[b] * nl + l_of[b]] = true;

  // Raw value of every realized (lambda, mu, k, l) combination.
  auto key = [&](int li, int mi, int k, int l) { return ((li * nmu + mi) * nk + k) * nl + l; };
  std::vector<double> raw;
  std::vector<int> raw_key;
  for (int li = 0; li < nlam; ++li)
    for (int mi = 0; mi < nmu; ++mi)
      for (int k = 0; k < nk; ++k)
        for (int l = 0; l < nl; ++l) {
          if (!pair_present[k * nl + l]) continue;
          raw.push_back(free_energy_estimate(l_reps[l], n, mus[mi], beta) -
                        free_energy_estimate(k_reps[k], n, lambdas[li], beta));
          raw_key.push_back(key(li, mi, k, l));
        }
  const auto [w_reps, w_of] = quantize_work_values(raw, tol_w);
  std::vector<int> bin_of_key(nlam * nmu * nk * nl, -1);
  for (std::size_t i = 0; i < raw.size(); ++i) bin_of_key[raw_key[i]] = w_of[i];

  const Dims dims = interleaved_dims(de, dx, n);
  std::vector<RealMatrix> mu_proj;
  for (const YoungDiagram& mu : mus) {
    const RealMatrix p =
        embed_x_sites(schur_weyl_projector(mu, n, dx).complex_projector(), de, dx, n).real();
    // The X-block projector must respect both energy labelings.
    for (int c = 0; c < total; ++c)
      for (int r = 0; r < total; ++r)
        if (p(r, c) != 0.0 && (k_of[r] != k_of[c] || l_of[r] != l_of[c]))
          throw std::logic_error("work-value factors do not commute: X block vs energy");
    mu_proj.push_back(p);
  }

  std::vector<RealMatrix> bins(w_reps.size(), RealMatrix::Zero(total, total));
  std::vector<int> row_bin(total);
  for (int li = 0; li < nlam; ++li) {
    const RealMatrix& pl = *schur_weyl_projector(lambdas[li], n, d).projector;
    for (int c = 0; c < total; ++c)
      for (int r = 0; r < total; ++r)
        if (pl(r, c) != 0.0 && (k_of[r] != k_of[c] || l_of[r] != l_of[c]))
          throw std::logic_error("work-value factors do not commute: joint block vs energy");
    for (int mi = 0; mi < nmu; ++mi) {
      const RealMatrix q = mu_proj[mi] * pl;
      if ((q - q.transpose()).cwiseAbs().maxCoeff() > kCommuteTol)
        throw std::logic_error("work-value factors do not commute: X block vs joint block");
      for (int b = 0; b < total; ++b) row_bin[b] = bin_of_key[key(li, mi, k_of[b], l_of[b])];
      kernels::scatter_rows(q, row_bin, bins);
    }
  }

  std::vector<Matrix> elements;
  const bool rotate = !(se.diagonal && sx.diagonal);
  const Matrix u = rotate ? tensor_power(tensor(se.basis, sx.basis), n) : Matrix();
  for (RealMatrix& b : bins) {
    Matrix m = b.cast<cplx>();
    if (rotate) m = hermitize(u * m * u.adjoint());
    elements.push_back(std::move(m));
  }
  return finalize(w_reps, std::move(elements), dims, WorkValuePOVM::Kind::kProjective);
}

WorkValuePOVM work_value_povm_EX_reference(const Matrix& h_ex, int d_e, const Matrix& h_x,
                                           int n, double beta, double tol_w) {
  const int dx = static_cast<int>(h_x.rows());
  const int d = static_cast<int>(h_ex.rows());
  if (d != d_e * dx) throw std::invalid_argument("work_value_povm_EX_reference: size mismatch");
  const EnergyBlockFamily r = energy_blocks(h_ex, n, tol_w);
  const EnergyBlockFamily s = energy_blocks(h_x, n, tol_w);
  std::vector<Matrix> s_emb;
  for (const Matrix& p : s.projectors) s_emb.push_back(embed_x_sites(p, d_e, dx, n));
  const std::vector<YoungDiagram> lambdas = young_diagrams(n, d);
  const std::vector<YoungDiagram> mus = young_diagrams(n, dx);
  std::vector<Matrix> pl, pm;
  for (const auto& l : lambdas) pl.push_back(schur_weyl_projector(l, n, d).complex_projector());
  for (const auto& m : mus)
    pm.push_back(embed_x_sites(schur_weyl_projector(m, n, dx).complex_projector(), d_e, dx, n));

  for (const Matrix& a : s_emb) {
    for (const Matrix& b : r.projectors) check_commute(a, b, "S vs R");
    for (const Matrix& b : pl) check_commute(a, b, "S vs joint block");
  }
  for (const Matrix& a : pm) {
    for (const Matrix& b : r.projectors) check_commute(a, b, "X block vs R");
    for (const Matrix& b : pl) check_commute(a, b, "X block vs joint block");
  }

  struct Term {
    int k, l, li, mi;
  };
  std::vector<Term> terms;
  std::vector<double> raw;
  for (std::size_t k = 0; k < r.energies.size(); ++k)
    for (std::size_t l = 0; l < s.energies.size(); ++l)
      for (std::size_t li = 0; li < lambdas.size(); ++li)
        for (std::size_t mi = 0; mi < mus.size(); ++mi) {
          terms.push_back({int(k), int(l), int(li), int(mi)});
          raw.push_back(free_energy_estimate(s.energies[l], n, mus[mi], beta) -
                        free_energy_estimate(r.energies[k], n, lambdas[li], beta));
        }
  const auto [reps, assign] = quantize_work_values(raw, tol_w);
  const int total = ipow(d, n);
  std::vector<Matrix> elements(reps.size(), Matrix::Zero(total, total));
  for (std::size_t t = 0; t < terms.size(); ++t) {
    const Term& tm = terms[t];
    elements[assign[t]] += s_emb[tm.l] * pm[tm.mi] * pl[tm.li] * r.projectors[tm.k];
  }
  return finalize(reps, std::move(elements), interleaved_dims(d_e, dx, n),
                  WorkValuePOVM::Kind::kProjective);
}

// ---------------------------------------------------------------------------
// Input-output measurement

WorkValuePOVM work_value_povm_inout(const Matrix& h_x, int n, double beta, double tol_w) {
  if (n < 1 || !(beta > 0.0)) throw std::invalid_argument("work_value_povm_inout: bad n or beta");
  const int dx = static_cast<int>(h_x.rows());
  const EnergyBlockFamily s = energy_blocks(h_x, n, tol_w);
  std::vector<Matrix> blocks;
  std::vector<double> estimates;
  for (const YoungDiagram& mu : young_diagrams(n, dx)) {
    const Matrix pm = schur_weyl_projector(mu, n, dx).complex_projector();
    for (std::size_t l = 0; l < s.energies.size(); ++l) {
      Matrix a = s.projectors[l] * pm;
      if (a.norm() <= kZeroElement) continue;
      blocks.push_back(std::move(a));
      estimates.push_back(free_energy_estimate(s.energies[l], n, mu, beta));
    }
  }
  std::vector<double> raw;
  std::vector<std::pair<int, int>> pairs;
  for (std::size_t i = 0; i < blocks.size(); ++i)
    for (std::size_t j = 0; j < blocks.size(); ++j) {
      raw.push_back(estimates[i] - estimates[j]);
      pairs.push_back({int(i), int(j)});
    }
  const auto [reps, assign] = quantize_work_values(raw, tol_w);
  const int total = ipow(dx, n);
  std::vector<Matrix> elements(reps.size(), Matrix::Zero(total * total, total * total));
  for (std::size_t t = 0; t < pairs.size(); ++t) {
    const auto [i, j] = pairs[t];
    elements[assign[t]] += tensor(blocks[i], Matrix(blocks[j].transpose()));
  }
  Dims dims(2 * n, dx);
  return finalize(reps, std::move(elements), dims, WorkValuePOVM::Kind::kProjective);
}

// ---------------------------------------------------------------------------
// Dephasing

Matrix dephase_W(const Matrix& rho, const Dims& dims, const Indices& on,
                 const WorkValuePOVM& povm) {
  if (povm.kind != WorkValuePOVM::Kind::kProjective)
    throw std::invalid_argument("dephase_W: POVM must be projective");
  const Indices order = move_to_back(dims, on);
  const Matrix p = permute_subsystems(rho, dims, order);
  int acted = 1;
  for (int i : on) acted *= dims[i];
  if (povm.elements.empty() || povm.elements.front().rows() != acted)
    throw std::invalid_argument("dephase_W: POVM size does not match acted subsystems");
  const int m = povm.size();
  std::vector<Matrix> terms(m);
#pragma omp parallel for schedule(dynamic)
  for (int w = 0; w < m; ++w) {
    const Matrix& e = povm.elements[w];
    terms[w] = left_apply_last(e, Matrix(left_apply_last(e, p).adjoint())).adjoint();
  }
  Matrix out = Matrix::Zero(p.rows(), p.cols());
  for (const Matrix& t : terms) out += t;
  return permute_subsystems(out, permuted_dims(dims, order), inverse(order));
}

std::vector<Vector> dephase_W_branches(const Vector& psi, const Dims& dims, const Indices& on,
                                       const WorkValuePOVM& povm) {
  const Indices order = move_to_back(dims, on);
  const Vector p = permute_subsystems(psi, dims, order);
  const Dims pdims = permuted_dims(dims, order);
  const Indices back = inverse(order);
  int acted = 1;
  for (int i : on) acted *= dims[i];
  if (povm.elements.empty() || povm.elements.front().rows() != acted)
    throw std::invalid_argument("dephase_W_branches: POVM size does not match");
  const Eigen::Index rest = p.size() / acted;
  std::vector<Vector> out;
  for (const Matrix& e : povm.elements) {
    Vector branch(p.size());
    Eigen::Map<const Matrix> pm(p.data(), acted, rest);
    Eigen::Map<Matrix> bm(branch.data(), acted, rest);
    bm.noalias() = e * pm;
    out.push_back(permute_subsystems(branch, pdims, back));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dephased channel

QuantumChannel DephasedChannel::channel() const {
  return QuantumChannel::from_choi(choi_dephased, base.dims_in(), base.dims_out());
}

DephasedChannel dephased_channel(const QuantumChannel& channel, const Matrix& h_x, int n,
                                 double beta, double tol_w) {
  if (channel.dim_in() != h_x.rows() || channel.dim_out() != h_x.rows())
    throw std::invalid_argument("dephased_channel: Hamiltonian size mismatch");
  const QuantumChannel flat =
      QuantumChannel::from_choi(channel.choi(), {channel.dim_in()}, {channel.dim_out()});
  QuantumChannel base = flat.tensor_power(n);
  const WorkValuePOVM povm = work_value_povm_inout(h_x, n, beta, tol_w);
  Matrix choi = hermitize(kernels::pinch(povm.elements, base.choi()));
  const int dn = base.dim_in();
  const double cp = std::max(0.0, -min_eigenvalue(choi));
  const double tp = max_abs(partial_trace(choi, {dn, dn}, {1}) - Matrix::Identity(dn, dn));
  return {std::move(base), std::move(choi), povm.size(), cp, tp};
}

Matrix stinespring_dephased_choi(const CovariantDilation& dil, int n, double beta,
                                 double tol_w) {
  const int de = dil.env_dim();
  const int dx = dil.sys_dim();
  // (V (x) I)|Phi> on E X R.
  Vector psi1(de * dx * dx);
  for (int ex = 0; ex < de * dx; ++ex)
    for (int r = 0; r < dx; ++r) psi1(ex * dx + r) = dil.v(ex, r);
  Dims copy_dims;
  for (int i = 0; i < n; ++i) copy_dims.insert(copy_dims.end(), {de, dx, dx});
  Indices order;
  for (int i = 0; i < n; ++i) order.insert(order.end(), {3 * i, 3 * i + 1});
  for (int i = 0; i < n; ++i) order.push_back(3 * i + 2);
  const Vector psi = permute_subsystems(tensor_power(psi1, n), copy_dims, order);
  const Dims dims = permuted_dims(copy_dims, order);

  const WorkValuePOVM povm =
      work_value_povm_EX(dil.env_hamiltonian(), dil.h_sys, n, beta, tol_w);
  Indices joint(2 * n);
  std::iota(joint.begin(), joint.end(), 0);
  const std::vector<Vector> branches = dephase_W_branches(psi, dims, joint, povm);

  // Reorder to E^n X^n R^n and trace out E^n.
  Indices e_first;
  for (int i = 0; i < n; ++i) e_first.push_back(2 * i);
  for (int i = 0; i < n; ++i) e_first.push_back(2 * i + 1);
  for (int i = 0; i < n; ++i) e_first.push_back(2 * n + i);
  const int den = ipow(de, n);
  const int rest = ipow(dx, 2 * n);
  Matrix choi = Matrix::Zero(rest, rest);
  for (const Vector& b : branches) {
    const Vector v = permute_subsystems(b, dims, e_first);
    Eigen::Map<const Matrix> m(v.data(), rest, den);
    choi.noalias() += m * m.adjoint();
  }
  return hermitize(choi);
}

EquivalenceReport stinespring_dephasing_equivalence(const QuantumChannel& channel,
                                                    const Matrix& h_x, int n, double beta,
                                                    double tol_w) {
  const CovariantDilation dil = covariant_dilation(channel, h_x);
  const DephasedChannel via_choi = dephased_channel(channel, h_x, n, beta, tol_w);
  const Matrix via_dilation = stinespring_dephased_choi(dil, n, beta, tol_w);
  const double dn = ipow(static_cast<int>(h_x.rows()), n);
  return {trace_distance(via_choi.choi_dephased, via_dilation) / dn, dil.env_dim(),
          via_choi.num_work_values};
}

// ---------------------------------------------------------------------------
// General (non-covariant) work-value operators

WorkValuePOVM work_value_operators_gpm(const Matrix& v, int d_e, const Matrix& h_x,
                                       const Matrix& h_xp, int n, double beta, double tol_w) {
  const int dx = static_cast<int>(h_x.rows());
  const int dxp = static_cast<int>(h_xp.rows());
  const int d = d_e * dxp;
  if (v.rows() != d || v.cols() != dx)
    throw std::invalid_argument("work_value_operators_gpm: isometry size mismatch");
  const Matrix gamma_x = spectral_apply(h_x, [beta](double e) { return std::exp(-beta * e); });
  const EigenSystem joint = eigh(v * gamma_x * v.adjoint());
  const double top = joint.values.maxCoeff();

  // Single-site energies of the joint Gibbs operator; kernel directions are null.
  std::vector<bool> null_site(d);
  RealVector e_site(d);
  for (int s = 0; s < d; ++s) {
    null_site[s] = joint.values(s) <= kRankCutoff * top;
    e_site(s) = null_site[s] ? 0.0 : -std::log(joint.values(s)) / beta;
  }
  const int total = ipow(d, n);
  const Matrix u = tensor_power(joint.vectors, n);
  std::vector<int> finite_index;
  std::vector<double> finite_energy;
  std::vector<int> null_index;
  for (int b = 0; b < total; ++b) {
    int r = b;
    bool is_null = false;
    double e = 0.0;
    for (int k = 0; k < n; ++k) {
      is_null = is_null || null_site[r % d];
      e += e_site(r % d);
      r /= d;
    }
    if (is_null) {
      null_index.push_back(b);
    } else {
      finite_index.push_back(b);
      finite_energy.push_back(e);
    }
  }
  const auto [k_reps, k_of] = quantize_work_values(finite_energy, tol_w);
  std::vector<Matrix> r_proj;
  for (std::size_t k = 0; k < k_reps.size(); ++k) {
    std::vector<int> cols;
    for (std::size_t i = 0; i < finite_index.size(); ++i)
      if (k_of[i] == static_cast<int>(k)) cols.push_back(finite_index[i]);
    Matrix b(total, static_cast<int>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) b.col(c) = u.col(cols[c]);
    r_proj.push_back(b * b.adjoint());
  }
  Matrix r_null = Matrix::Zero(total, total);
  if (!null_index.empty()) {
    Matrix b(total, static_cast<int>(null_index.size()));
    for (std::size_t c = 0; c < null_index.size(); ++c) b.col(c) = u.col(null_index[c]);
    r_null = b * b.adjoint();
  }

  const EnergyBlockFamily s = energy_blocks(h_xp, n, tol_w);
  std::vector<Matrix> s_emb;
  for (const Matrix& p : s.projectors) s_emb.push_back(embed_x_sites(p, d_e, dxp, n));
  const std::vector<YoungDiagram> lambdas = young_diagrams(n, d);
  const std::vector<YoungDiagram> mus = young_diagrams(n, dxp);

  struct Term {
    int k, l;
    std::size_t q;
  };
  std::vector<Matrix> q;  // S_l Pi^mu Pi^lambda, indexed with its estimate.
  std::vector<double> q_estimate;
  std::vector<double> q_entropy;
  for (const YoungDiagram& lambda : lambdas) {
    const Matrix pl = schur_weyl_projector(lambda, n, d).complex_projector();
    for (const YoungDiagram& mu : mus) {
      const Matrix pm =
          embed_x_sites(schur_weyl_projector(mu, n, dxp).complex_projector(), d_e, dxp, n);
      const Matrix pmpl = pm * pl;
      for (std::size_t l = 0; l < s_emb.size(); ++l) {
        Matrix t = s_emb[l] * pmpl;
        if (t.norm() <= kZeroElement) continue;
        q.push_back(std::move(t));
        q_estimate.push_back(free_energy_estimate(s.energies[l], n, mu, beta));
        q_entropy.push_back(lambda.entropy());
      }
    }
  }
  std::vector<double> raw;
  std::vector<std::pair<std::size_t, int>> terms;
  for (std::size_t i = 0; i < q.size(); ++i)
    for (std::size_t k = 0; k < k_reps.size(); ++k) {
      raw.push_back(q_estimate[i] - (k_reps[k] / n - q_entropy[i] / beta));
      terms.push_back({i, int(k)});
    }
  const auto [reps, assign] = quantize_work_values(raw, tol_w);
  std::vector<Matrix> elements(reps.size(), Matrix::Zero(total, total));
  for (std::size_t t = 0; t < terms.size(); ++t)
    elements[assign[t]] += q[terms[t].first] * r_proj[terms[t].second];

  WorkValuePOVM povm = finalize(reps, std::move(elements), interleaved_dims(d_e, dxp, n),
                                WorkValuePOVM::Kind::kGeneral);
  if (r_null.norm() > kZeroElement) {
    povm.values.insert(povm.values.begin(), -std::numeric_limits<double>::infinity());
    povm.elements.insert(povm.elements.begin(), r_null);
    povm.null_element = 0;
  }
  return povm;
}

WorkCostCovariance is_work_cost_covariant(const QuantumChannel& channel, const Matrix& h_x,
                                          int n, double beta, double tol_w) {
  const DephasedChannel dc = dephased_channel(channel, h_x, n, beta, tol_w);
  const double dn = dc.base.dim_in();
  const double dev = trace_distance(dc.choi_dephased, dc.base.choi()) / dn;
  return {dev <= 1e-8, dev};
}

}  // namespace thermoforge
