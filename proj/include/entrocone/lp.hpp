#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

namespace entrocone::lp {

using Rational = mpq_class;

/// Sparse column: (row, value) pairs with distinct rows.
using SparseColumn = std::vector<std::pair<int, Rational>>;

/// The Farkas system  Σ_j λ_j · column_j = rhs,  λ ≥ 0.
///
/// Exactly one alternative holds: either nonnegative multipliers exist, or
/// there is a certificate y with y·column_j ≥ 0 for every j and y·rhs < 0.
struct FarkasProblem {
  int dim = 0;
  const std::vector<SparseColumn>* pool = nullptr;  // column storage
  std::vector<int> active;                          // indices into pool
  std::vector<Rational> rhs;                        // size dim
};

struct FarkasResult {
  bool feasible = false;
  std::vector<Rational> multipliers;  // per active column, when feasible
  std::vector<Rational> certificate;  // size dim, when infeasible
  bool used_exact_simplex = false;
};

namespace detail {

template <typename S>
struct Tolerance;

template <>
struct Tolerance<double> {
  static bool negative(double v) { return v < -1e-9; }
  static bool positive(double v) { return v > 1e-9; }
  static double ratio(double a, double b) { return a / b; }
};

template <>
struct Tolerance<Rational> {
  static bool negative(const Rational& v) { return sgn(v) < 0; }
  static bool positive(const Rational& v) { return sgn(v) > 0; }
  static Rational ratio(const Rational& a, const Rational& b) { return a / b; }
};

/// Dense phase-1 tableau: minimise the sum of artificials of
///   T λ + s = |rhs|,  λ, s ≥ 0,
/// where T is the column matrix with rows sign-flipped to make rhs ≥ 0.
/// Returns the final basis (column ids; id >= ncols denotes the
/// artificial of row id - ncols) or nullopt on iteration overflow.
template <typename S>
std::optional<std::vector<int>> phase_one_basis(int dim, int ncols, const std::vector<S>& dense_cols,
                                                const std::vector<S>& rhs_abs, bool bland_only,
                                                std::size_t max_iterations) {
  using Tol = Tolerance<S>;
  const int width = ncols + dim;
  std::vector<S> tab(static_cast<std::size_t>(dim) * width, S(0));
  std::vector<S> rhs = rhs_abs;
  for (int j = 0; j < ncols; ++j)
    for (int r = 0; r < dim; ++r) tab[static_cast<std::size_t>(r) * width + j] = dense_cols[static_cast<std::size_t>(j) * dim + r];
  for (int r = 0; r < dim; ++r) tab[static_cast<std::size_t>(r) * width + ncols + r] = S(1);
  std::vector<int> basis(static_cast<std::size_t>(dim));
  for (int r = 0; r < dim; ++r) basis[r] = ncols + r;

  std::vector<S> reduced(static_cast<std::size_t>(width), S(0));
  for (int j = 0; j < ncols; ++j) {
    S acc(0);
    for (int r = 0; r < dim; ++r) acc -= tab[static_cast<std::size_t>(r) * width + j];
    reduced[j] = acc;
  }

  std::size_t degenerate_run = 0;
  for (std::size_t iter = 0; iter < max_iterations; ++iter) {
    const bool bland = bland_only || degenerate_run > 50;
    int enter = -1;
    S best(0);
    for (int j = 0; j < width; ++j) {
      if (!Tol::negative(reduced[j])) continue;
      if (bland) {
        enter = j;
        break;
      }
      if (enter < 0 || reduced[j] < best) {
        enter = j;
        best = reduced[j];
      }
    }
    if (enter < 0) return basis;

    int leave = -1;
    S best_ratio(0);
    for (int r = 0; r < dim; ++r) {
      const S& a = tab[static_cast<std::size_t>(r) * width + enter];
      if (!Tol::positive(a)) continue;
      S q = Tol::ratio(rhs[r], a);
      if (leave < 0 || q < best_ratio || (!(best_ratio < q) && basis[r] < basis[leave])) {
        leave = r;
        best_ratio = q;
      }
    }
    if (leave < 0) return std::nullopt;  // phase one is bounded below; only reachable numerically
    degenerate_run = Tol::positive(best_ratio) ? 0 : degenerate_run + 1;

    // pivot
    S* prow = &tab[static_cast<std::size_t>(leave) * width];
    const S piv = prow[enter];
    std::vector<int> nz;
    for (int j = 0; j < width; ++j) {
      if (prow[j] == S(0)) continue;
      prow[j] /= piv;
      nz.push_back(j);
    }
    rhs[leave] /= piv;
    for (int r = 0; r < dim; ++r) {
      if (r == leave) continue;
      S* row = &tab[static_cast<std::size_t>(r) * width];
      if (row[enter] == S(0)) continue;
      const S f = row[enter];
      for (int j : nz) row[j] -= f * prow[j];
      rhs[r] -= f * rhs[leave];
      if constexpr (std::is_same_v<S, double>) row[enter] = 0.0;
    }
    if (reduced[enter] != S(0)) {
      const S f = reduced[enter];
      for (int j : nz) reduced[j] -= f * prow[j];
      if constexpr (std::is_same_v<S, double>) reduced[enter] = 0.0;
    }
    basis[leave] = enter;
  }
  return std::nullopt;
}

/// Solves M v = b exactly for square M (row-major). Returns nullopt if M is
/// singular.
inline std::optional<std::vector<Rational>> solve_square(int n, std::vector<Rational> m, std::vector<Rational> b) {
  std::vector<int> nz;
  for (int col = 0; col < n; ++col) {
    int piv = -1;
    for (int r = col; r < n; ++r)
      if (sgn(m[static_cast<std::size_t>(r) * n + col]) != 0) {
        piv = r;
        break;
      }
    if (piv < 0) return std::nullopt;
    if (piv != col) {
      for (int j = 0; j < n; ++j) std::swap(m[static_cast<std::size_t>(piv) * n + j], m[static_cast<std::size_t>(col) * n + j]);
      std::swap(b[piv], b[col]);
    }
    Rational* prow = &m[static_cast<std::size_t>(col) * n];
    const Rational p = prow[col];
    nz.clear();
    for (int j = col; j < n; ++j)
      if (sgn(prow[j]) != 0) {
        prow[j] /= p;
        nz.push_back(j);
      }
    b[col] /= p;
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      Rational* row = &m[static_cast<std::size_t>(r) * n];
      if (sgn(row[col]) == 0) continue;
      const Rational f = row[col];
      for (int j : nz) row[j] -= f * prow[j];
      b[r] -= f * b[col];
    }
  }
  return b;
}

}  // namespace detail

/// Decides the Farkas system with exact certification.
///
/// A double-precision phase-1 simplex proposes a basis; the basis is then
/// re-solved in rationals and either the primal multipliers (feasible) or
/// the dual vector (infeasible certificate) is verified exactly. If
/// neither verifies, an exact rational simplex with Bland's rule decides.
inline FarkasResult solve_farkas(const FarkasProblem& prob) {
  const int dim = prob.dim;
  const int ncols = static_cast<int>(prob.active.size());
  const auto& pool = *prob.pool;

  std::vector<int> flip(static_cast<std::size_t>(dim), 1);
  for (int r = 0; r < dim; ++r)
    if (sgn(prob.rhs[r]) < 0) flip[r] = -1;

  auto certify = [&](const std::vector<int>& basis) -> std::optional<FarkasResult> {
    std::vector<Rational> bmat(static_cast<std::size_t>(dim) * dim, Rational(0));
    for (int k = 0; k < dim; ++k) {
      const int id = basis[k];
      if (id >= ncols) {
        bmat[static_cast<std::size_t>(id - ncols) * dim + k] = 1;
      } else {
        for (const auto& [r, v] : pool[prob.active[id]]) bmat[static_cast<std::size_t>(r) * dim + k] = flip[r] * v;
      }
    }
    std::vector<Rational> b(static_cast<std::size_t>(dim));
    for (int r = 0; r < dim; ++r) b[r] = flip[r] * prob.rhs[r];

    if (auto x = detail::solve_square(dim, bmat, b)) {
      bool ok = true;
      for (int k = 0; k < dim && ok; ++k) {
        if (basis[k] >= ncols)
          ok = sgn((*x)[k]) == 0;
        else
          ok = sgn((*x)[k]) >= 0;
      }
      if (ok) {
        FarkasResult res;
        res.feasible = true;
        res.multipliers.assign(static_cast<std::size_t>(ncols), Rational(0));
        for (int k = 0; k < dim; ++k)
          if (basis[k] < ncols) res.multipliers[basis[k]] = (*x)[k];
        return res;
      }
      // dual: B^T y = c_B with unit cost on artificials
      std::vector<Rational> bt(static_cast<std::size_t>(dim) * dim);
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) bt[static_cast<std::size_t>(i) * dim + j] = bmat[static_cast<std::size_t>(j) * dim + i];
      std::vector<Rational> cb(static_cast<std::size_t>(dim));
      for (int k = 0; k < dim; ++k) cb[k] = basis[k] >= ncols ? 1 : 0;
      if (auto y = detail::solve_square(dim, std::move(bt), std::move(cb))) {
        Rational yb = 0;
        for (int r = 0; r < dim; ++r) yb += (*y)[r] * b[r];
        if (sgn(yb) <= 0) return std::nullopt;
        for (int j = 0; j < ncols; ++j) {
          Rational acc = 0;
          for (const auto& [r, v] : pool[prob.active[j]]) acc += (*y)[r] * flip[r] * v;
          if (sgn(acc) > 0) return std::nullopt;
        }
        FarkasResult res;
        res.feasible = false;
        res.certificate.resize(static_cast<std::size_t>(dim));
        for (int r = 0; r < dim; ++r) res.certificate[r] = -(*y)[r] * flip[r];
        return res;
      }
    }
    return std::nullopt;
  };

  {
    std::vector<double> cols(static_cast<std::size_t>(ncols) * dim, 0.0);
    for (int j = 0; j < ncols; ++j)
      for (const auto& [r, v] : pool[prob.active[j]]) cols[static_cast<std::size_t>(j) * dim + r] = flip[r] * v.get_d();
    std::vector<double> rhs(static_cast<std::size_t>(dim));
    for (int r = 0; r < dim; ++r) rhs[r] = std::abs(prob.rhs[r].get_d());
    // a fixed small perturbation of the right-hand side breaks the heavy
    // degeneracy of implication problems; the exact check uses the original
    std::vector<double> perturbed = rhs;
    double scale = 1.0;
    for (double v : rhs) scale = std::max(scale, v);
    std::uint64_t state = 0x9e3779b97f4a7c15ull;
    for (auto& v : perturbed) {
      state = state * 6364136223846793005ull + 1442695040888963407ull;
      v += scale * 1e-7 * (1.0 + static_cast<double>(state >> 11) / 9007199254740992.0);
    }
    for (const auto* b : {&perturbed, &rhs})
      if (auto basis = detail::phase_one_basis<double>(dim, ncols, cols, *b, false, 50000))
        if (auto res = certify(*basis)) return *res;
  }

  std::vector<Rational> cols(static_cast<std::size_t>(ncols) * dim, Rational(0));
  for (int j = 0; j < ncols; ++j)
    for (const auto& [r, v] : pool[prob.active[j]]) cols[static_cast<std::size_t>(j) * dim + r] = flip[r] * v;
  std::vector<Rational> rhs(static_cast<std::size_t>(dim));
  for (int r = 0; r < dim; ++r) rhs[r] = abs(prob.rhs[r]);
  auto basis = detail::phase_one_basis<Rational>(dim, ncols, cols, rhs, true, std::numeric_limits<std::size_t>::max());
  auto res = certify(*basis);
  // Bland's rule terminates at an optimal basis, which always certifies.
  res->used_exact_simplex = true;
  return *res;
}

/// Decides Σ λ_j pool_j = rhs (λ ≥ 0) over the columns listed in `allowed`
/// by delayed column generation: solve on a working subset (initially
/// `seed`), and while that is infeasible, test the exact certificate
/// against every allowed column and add the most violated ones. Both
/// outcomes are exact and do not depend on the seed. Multipliers are
/// indexed like `allowed`.
inline FarkasResult solve_farkas_generated(int dim, const std::vector<SparseColumn>& pool,
                                           const std::vector<int>& allowed, const std::vector<Rational>& rhs,
                                           const std::vector<int>& seed = {}) {
  constexpr std::size_t kDirectColumns = 300;
  constexpr std::size_t kBatch = 100;
  if (allowed.size() <= kDirectColumns) {
    FarkasProblem prob;
    prob.dim = dim;
    prob.pool = &pool;
    prob.active = allowed;
    prob.rhs = rhs;
    return solve_farkas(prob);
  }

  // rows touched so far are compacted to keep the LP small
  std::vector<int> row_map(static_cast<std::size_t>(dim), -1);
  std::vector<int> rows;
  auto use_row = [&](int r) {
    if (row_map[r] < 0) {
      row_map[r] = static_cast<int>(rows.size());
      rows.push_back(r);
    }
  };
  for (int r = 0; r < dim; ++r)
    if (sgn(rhs[r]) != 0) use_row(r);

  std::vector<int> slot(pool.size(), -1);
  for (std::size_t k = 0; k < allowed.size(); ++k) slot[allowed[k]] = static_cast<int>(k);
  std::vector<char> in_work(allowed.size(), 0);
  std::vector<int> work;
  auto take = [&](std::size_t k) {
    if (in_work[k]) return;
    in_work[k] = 1;
    work.push_back(static_cast<int>(k));
    for (const auto& [r, v] : pool[allowed[k]]) use_row(r);
  };
  for (int j : seed)
    if (j >= 0 && static_cast<std::size_t>(j) < pool.size() && slot[j] >= 0) take(static_cast<std::size_t>(slot[j]));

  std::vector<SparseColumn> local;
  for (;;) {
    local.clear();
    for (int k : work) {
      SparseColumn c;
      for (const auto& [r, v] : pool[allowed[k]]) c.emplace_back(row_map[r], v);
      local.push_back(std::move(c));
    }
    FarkasProblem sub;
    sub.dim = static_cast<int>(rows.size());
    sub.pool = &local;
    sub.active.resize(local.size());
    std::iota(sub.active.begin(), sub.active.end(), 0);
    sub.rhs.resize(rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k) sub.rhs[k] = rhs[rows[k]];
    FarkasResult res = sub.dim == 0 ? FarkasResult{true, {}, {}, false} : solve_farkas(sub);
    res.multipliers.resize(local.size());

    FarkasResult full;
    full.used_exact_simplex = res.used_exact_simplex;
    if (res.feasible) {
      full.feasible = true;
      full.multipliers.assign(allowed.size(), Rational(0));
      for (std::size_t k = 0; k < work.size(); ++k) full.multipliers[work[k]] = res.multipliers[k];
      return full;
    }
    std::vector<Rational> y(static_cast<std::size_t>(dim), Rational(0));
    for (std::size_t k = 0; k < rows.size(); ++k) y[rows[k]] = res.certificate[k];

    std::vector<std::pair<Rational, std::size_t>> violated;
    for (std::size_t k = 0; k < allowed.size(); ++k) {
      if (in_work[k]) continue;
      Rational acc = 0;
      for (const auto& [r, v] : pool[allowed[k]])
        if (row_map[r] >= 0) acc += y[r] * v;
      if (sgn(acc) < 0) violated.emplace_back(std::move(acc), k);
    }
    if (violated.empty()) {
      full.feasible = false;
      full.certificate = std::move(y);
      return full;
    }
    std::sort(violated.begin(), violated.end());
    if (violated.size() > kBatch) violated.resize(kBatch);
    for (const auto& [v, k] : violated) take(k);
  }
}

}  // namespace entrocone::lp
