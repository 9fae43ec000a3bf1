#pragma once

#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "entrocone/constraint.hpp"
#include "entrocone/dag.hpp"
#include "entrocone/lp.hpp"

namespace entrocone {

/// Number of elementary inequalities n + C(n,2)·2^(n-2).
inline std::size_t num_elementary_inequalities(int n) {
  const std::size_t pairs = static_cast<std::size_t>(n) * static_cast<std::size_t>(n - 1) / 2;
  return static_cast<std::size_t>(n) + (n >= 2 ? pairs * (std::size_t{1} << (n - 2)) : 0);
}

inline std::string ci_label(const CiStatement& ci, const std::vector<std::string>& names) {
  std::string s = "CI:" + subset_label(ci.a, names) + "⊥" + subset_label(ci.b, names);
  if (!ci.z.empty()) s += "|" + subset_label(ci.z, names);
  return s;
}

/// The Shannon cone Γ_n: monotonicity h([n]) - h([n]\{i}) ≥ 0 and
/// submodularity h(S∪i) + h(S∪j) - h(S) - h(S∪ij) ≥ 0.
inline ConstraintSystem elementary_inequalities(int n, std::vector<std::string> names = {}) {
  check_variable_count(n);
  if (names.empty())
    for (int i = 0; i < n; ++i) names.push_back("X" + std::to_string(i + 1));
  ConstraintSystem sys(n, names);
  const SubsetIndex all = SubsetIndex::full(n);
  for (int i = 0; i < n; ++i)
    sys.add(LinearConstraint::ge(H(all) - H(all.without(i)), "monotonicity(" + names[i] + ")"));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const SubsetIndex rest = all.without(i).without(j);
      std::uint32_t sub = 0;
      do {
        const SubsetIndex s{sub};
        sys.add(LinearConstraint::ge(I(SubsetIndex::singleton(i), SubsetIndex::singleton(j), s),
                                     "submodularity(" + subset_label(s, names) + "," + names[i] + "," + names[j] + ")"));
        sub = (sub - rest.mask) & rest.mask;
      } while (sub != 0);
    }
  return sys;
}

/// I(a : b | z) = 0 as a homogeneous equality.
inline LinearConstraint ci_to_constraint(const CiStatement& ci, int n, const std::vector<std::string>& names = {}) {
  ci.validate();
  if (!(ci.a | ci.b | ci.z).subset_of(SubsetIndex::full(n))) throw InvalidArgument("CI statement outside [n]");
  return LinearConstraint::eq(I(ci.a, ci.b, ci.z), names.empty() ? std::string{} : ci_label(ci, names));
}

/// Γ_n ∩ Γ_c for the DAG: elementary inequalities plus the CI equalities.
inline ConstraintSystem constrained_cone(const Dag& dag, CiMode mode = CiMode::kPairwiseSingleton) {
  ConstraintSystem sys = elementary_inequalities(dag.size(), dag.names());
  for (const auto& ci : ci_constraints(dag, mode)) sys.add(ci_to_constraint(ci, dag.size(), dag.names()));
  return sys;
}

/// Appends ε - I(a:b|z) ≥ 0.
inline ConstraintSystem add_epsilon_constraint(ConstraintSystem sys, const CiStatement& ci, const Rational& epsilon) {
  if (sgn(epsilon) < 0) throw InvalidArgument("epsilon must be nonnegative");
  ci.validate();
  std::string label = "eps:" + ci_label(ci, sys.names()).substr(3) + "<=" + epsilon.get_str();
  sys.add(LinearConstraint::ge(LinearExpr(epsilon) - I(ci.a, ci.b, ci.z), std::move(label)));
  return sys;
}

/// Outcome of an implication check. When not implied, `witness` satisfies
/// every constraint of the system and violates the candidate (a point), or
/// is a recession direction along which the candidate decreases (a ray).
struct ImplicationResult {
  bool implied = false;
  std::map<Coord, Rational, CoordLess> witness;
  bool witness_is_ray = false;
  /// Multipliers of the system's inequalities (in system order) when implied.
  std::vector<Rational> multipliers;
};

namespace detail {

/// Maps coordinates to LP rows; row `dim - 1` is the constant.
class CoordIndex {
 public:
  void add(Coord c) {
    if (!index_.count(c.key)) {
      index_.emplace(c.key, static_cast<int>(coords_.size()));
      coords_.push_back(c);
    }
  }
  void add_all(const LinearExpr& e) {
    for (const auto& [c, k] : e.coeffs()) add(c);
  }
  int row(Coord c) const { return index_.at(c.key); }
  int dim() const { return static_cast<int>(coords_.size()) + 1; }
  const std::vector<Coord>& coords() const { return coords_; }

  lp::SparseColumn column(const LinearExpr& e, int sign = 1) const {
    lp::SparseColumn col;
    for (const auto& [c, k] : e.coeffs()) col.emplace_back(row(c), sign * k);
    if (sgn(e.constant()) != 0) col.emplace_back(dim() - 1, sign * e.constant());
    return col;
  }

 private:
  std::unordered_map<std::uint32_t, int> index_;
  std::vector<Coord> coords_;
};

}  // namespace detail


/// True iff candidate holds on the whole feasible set of the system,
/// decided exactly via Farkas' lemma (affine form, homogenised with a
/// constant row). An infeasible system implies everything.
inline ImplicationResult implies(const ConstraintSystem& sys, const LinearConstraint& candidate) {
  using Sparse = std::map<int, Rational>;
  detail::CoordIndex idx;
  for (const auto& c : sys.inequalities()) idx.add_all(c.expr());
  for (const auto& c : sys.equalities()) idx.add_all(c.expr());
  idx.add_all(candidate.expr());
  const int dim = idx.dim();
  const int const_row = dim - 1;
  auto to_sparse = [&](const LinearExpr& e) {
    Sparse out;
    for (const auto& [r, v] : idx.column(e)) out.emplace(r, v);
    return out;
  };
  auto axpy = [](Sparse& x, const Rational& f, const Sparse& y) {
    for (const auto& [r, v] : y) {
      auto [it, fresh] = x.emplace(r, Rational(0));
      it->second -= f * v;
      if (sgn(it->second) == 0) x.erase(it);
    }
  };

  // equalities in reduced row echelon form; each pivot coordinate is then
  // substituted away (largest subsets first)
  std::map<int, Sparse> pivots;
  auto reduce = [&](Sparse& x) {
    std::vector<std::pair<int, Rational>> hits;
    for (const auto& [r, v] : x)
      if (pivots.count(r)) hits.emplace_back(r, v);
    for (const auto& [r, v] : hits) axpy(x, v, pivots.at(r));
  };
  bool contradictory = false;
  for (const auto& c : sys.equalities()) {
    Sparse e = to_sparse(c.expr());
    reduce(e);
    int q = -1;
    for (const auto& [r, v] : e) {
      if (r == const_row) continue;
      const Coord cq = idx.coords()[r];
      if (q < 0) {
        q = r;
        continue;
      }
      const Coord cb = idx.coords()[q];
      const int sq = cq.is_aux() ? 0 : cq.as_subset().size(), sb = cb.is_aux() ? 0 : cb.as_subset().size();
      if (sq > sb) q = r;
    }
    if (q < 0) {
      contradictory = contradictory || !e.empty();
      continue;
    }
    const Rational inv = 1 / e.at(q);
    for (auto& [r, v] : e) v *= inv;
    for (auto& [p, row] : pivots)
      if (auto it = row.find(q); it != row.end()) {
        const Rational f = it->second;
        axpy(row, f, e);
      }
    pivots.emplace(q, std::move(e));
  }
  if (contradictory) pivots.clear();

  // reduced columns, deduplicated; `origin` maps them back
  std::vector<int> compact(static_cast<std::size_t>(dim), -1);
  int rdim = 0;
  for (int r = 0; r < dim; ++r)
    if (!pivots.count(r)) compact[r] = rdim++;
  auto to_column = [&](const Sparse& x) {
    lp::SparseColumn col;
    for (const auto& [r, v] : x) col.emplace_back(compact[r], v);
    return col;
  };
  std::vector<lp::SparseColumn> pool;
  std::vector<int> origin;
  std::map<std::vector<std::pair<int, std::string>>, int> seen;
  for (std::size_t i = 0; i < sys.inequalities().size(); ++i) {
    Sparse a = to_sparse(sys.inequalities()[i].expr());
    reduce(a);
    if (a.empty()) continue;
    std::vector<std::pair<int, std::string>> key;
    for (const auto& [r, v] : a) key.emplace_back(r, v.get_str());
    if (!seen.emplace(std::move(key), static_cast<int>(pool.size())).second) continue;
    pool.push_back(to_column(a));
    origin.push_back(static_cast<int>(i));
  }
  const std::size_t n_ineq_cols = pool.size();
  if (contradictory) {
    for (const auto& c : sys.equalities()) {
      pool.push_back(to_column(to_sparse(c.expr())));
      Sparse neg = to_sparse(c.expr());
      for (auto& [r, v] : neg) v = -v;
      pool.push_back(to_column(neg));
    }
  }
  pool.push_back({{compact[const_row], Rational(1)}});

  auto decide = [&](const LinearExpr& target) {
    Sparse t = to_sparse(target);
    reduce(t);
    std::vector<Rational> rhs(static_cast<std::size_t>(rdim), Rational(0));
    for (const auto& [r, v] : t) rhs[compact[r]] = v;
    std::vector<int> all(pool.size());
    std::iota(all.begin(), all.end(), 0);
    return lp::solve_farkas_generated(rdim, pool, all, rhs);
  };

  ImplicationResult out;
  auto res = decide(candidate.expr());
  if (candidate.is_equality() && res.feasible) {
    auto neg = decide(-candidate.expr());
    if (!neg.feasible) res = std::move(neg);
  }
  out.implied = res.feasible;
  if (res.feasible) {
    out.multipliers.assign(sys.inequalities().size(), Rational(0));
    for (std::size_t k = 0; k < n_ineq_cols; ++k) out.multipliers[origin[k]] = res.multipliers[k];
    return out;
  }
  // lift the certificate: pivot coordinates follow from the equalities
  std::vector<Rational> cert(static_cast<std::size_t>(dim), Rational(0));
  for (int r = 0; r < dim; ++r)
    if (compact[r] >= 0) cert[r] = res.certificate[compact[r]];
  for (const auto& [p, row] : pivots) {
    Rational v = 0;
    for (const auto& [r, k] : row)
      if (r != p) v -= k * cert[r];
    cert[p] = v;
  }
  const Rational& x0 = cert.back();
  out.witness_is_ray = sgn(x0) == 0;
  for (std::size_t r = 0; r + 1 < cert.size(); ++r) {
    Rational v = cert[r];
    if (!out.witness_is_ray) v /= x0;
    if (sgn(v) != 0) out.witness.emplace(idx.coords()[r], v);
  }
  return out;
}

/// True iff the system has a feasible point.
inline bool feasible(const ConstraintSystem& sys) {
  return !implies(sys, LinearConstraint::ge(LinearExpr(Rational(-1)))).implied;
}

/// Γ over the variables in `vars`, embedded in the n-variable space.
inline ConstraintSystem elementary_inequalities_on(SubsetIndex vars, int n, const std::vector<std::string>& names) {
  const auto members = vars.members();
  const auto local = elementary_inequalities(static_cast<int>(members.size()));
  auto lift = [&](SubsetIndex s) {
    SubsetIndex out;
    for (int i : s.members()) out = out.with(members[i]);
    return out;
  };
  ConstraintSystem sys(n, names);
  for (const auto& c : local.inequalities()) {
    LinearExpr e(c.expr().constant());
    for (const auto& [k, v] : c.expr().coeffs()) e.add(Coord::subset(lift(k.as_subset())), v);
    sys.add(LinearConstraint::ge(std::move(e)));
  }
  return sys;
}

/// Basic Shannon inequalities that mention only the given subset
/// coordinates: h(T) ≥ h(S) for S ⊂ T (including h(T) ≥ 0) and
/// h(A) + h(B) ≥ h(A∪B) + h(A∩B) whenever all four are present.
/// For the full power set this generates Γ_m.
inline ConstraintSystem basic_inequalities_on(const std::vector<SubsetIndex>& kept, int n,
                                              const std::vector<std::string>& names) {
  ConstraintSystem sys(n, names);
  std::set<std::uint32_t> present;
  for (auto s : kept) present.insert(s.mask);
  auto has = [&](SubsetIndex s) { return s.empty() || present.count(s.mask) > 0; };
  for (auto t : kept) {
    sys.add(LinearConstraint::ge(H(t), "nonnegativity"));
    for (auto s : kept)
      if (s != t && s.subset_of(t)) sys.add(LinearConstraint::ge(H(t) - H(s), "monotonicity"));
  }
  for (auto a : kept)
    for (auto b : kept) {
      if (a.mask >= b.mask || a.subset_of(b) || b.subset_of(a)) continue;
      if (has(a | b) && has(a & b))
        sys.add(LinearConstraint::ge(H(a) + H(b) - H(a | b) - H(a & b), "submodularity"));
    }
  return sys;
}

}  // namespace entrocone
