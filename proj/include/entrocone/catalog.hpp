#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "entrocone/constraint.hpp"
#include "entrocone/dag.hpp"
#include "entrocone/witness.hpp"

// Reference DAGs, structural models and known inequalities used by the CLI
// catalog, the golden files and the acceptance suite.
namespace entrocone::catalog {

inline DagNode observed(std::string name) { return {std::move(name), true}; }
inline DagNode hidden(std::string name) { return {std::move(name), false}; }

using Edges = std::vector<std::pair<std::string, std::string>>;

/// Instrumental scenario: Z -> X -> Y with X and Y confounded by hidden U.
inline Dag instrumental() {
  return Dag::from_edges({observed("X"), observed("Y"), observed("Z"), hidden("U")},
                         Edges{{"Z", "X"}, {"U", "X"}, {"U", "Y"}, {"X", "Y"}});
}

/// X -> Y with hidden U common to X, Y, Z and hidden U2 common to Z and Y.
/// U2 is independent of X and every distribution of (X, Y, Z) is reachable.
inline Dag instrumental_confounded() {
  return Dag::from_edges({observed("X"), observed("Y"), observed("Z"), hidden("U"), hidden("U2")},
                         Edges{{"U", "X"}, {"U", "Y"}, {"U", "Z"}, {"X", "Y"}, {"U2", "Z"}, {"U2", "Y"}});
}

/// Instrumental scenario with a direct edge Z -> Y.
inline Dag instrumental_with_direct_edge() {
  return Dag::from_edges({observed("X"), observed("Y"), observed("Z"), hidden("U")},
                         Edges{{"Z", "X"}, {"U", "X"}, {"U", "Y"}, {"X", "Y"}, {"Z", "Y"}});
}

/// Fully observed diamond X -> {Y, W} -> Z.
inline Dag diamond() {
  return Dag::from_edges({observed("X"), observed("Y"), observed("W"), observed("Z")},
                         Edges{{"X", "Y"}, {"X", "W"}, {"Y", "Z"}, {"W", "Z"}});
}

/// The diamond with X and Z exchanged: Z -> {Y, W} -> X.
inline Dag diamond_reversed() {
  return Dag::from_edges({observed("X"), observed("Y"), observed("W"), observed("Z")},
                         Edges{{"Z", "Y"}, {"Z", "W"}, {"Y", "X"}, {"W", "X"}});
}

/// Three observables sharing one hidden ancestor U.
inline Dag single_ancestor() {
  return Dag::from_edges({observed("V1"), observed("V2"), observed("V3"), hidden("U")},
                         Edges{{"U", "V1"}, {"U", "V2"}, {"U", "V3"}});
}

/// Triangle: each pair of V1, V2, V3 shares a hidden ancestor U_ij.
inline Dag triangle() {
  return Dag::from_edges({observed("V1"), observed("V2"), observed("V3"), hidden("U12"), hidden("U13"), hidden("U23")},
                         Edges{{"U12", "V1"}, {"U12", "V2"}, {"U13", "V1"}, {"U13", "V3"}, {"U23", "V2"}, {"U23", "V3"}});
}

/// Triangle with a direct edge V1 -> V2.
inline Dag triangle_with_edge() {
  return Dag::from_edges({observed("V1"), observed("V2"), observed("V3"), hidden("U12"), hidden("U13"), hidden("U23")},
                         Edges{{"U12", "V1"}, {"U12", "V2"}, {"U13", "V1"}, {"U13", "V3"}, {"U23", "V2"}, {"U23", "V3"},
                               {"V1", "V2"}});
}

inline std::string ancestor_name(SubsetIndex s) {
  std::string out = "U";
  for (int i : s.members()) out += std::to_string(i + 1);
  return out;
}

/// Common-ancestor DAG: observables V1..Vn and one hidden parent for every
/// m-subset of them.
inline Dag common_ancestor_dag(int n, int m) {
  if (n < 2 || m < 2 || m > n) throw InvalidArgument("common-ancestor DAG needs 2 <= m <= n");
  std::vector<DagNode> nodes;
  for (int i = 0; i < n; ++i) nodes.push_back(observed("V" + std::to_string(i + 1)));
  std::vector<SubsetIndex> groups;
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask)
    if (SubsetIndex{mask}.size() == m) groups.push_back(SubsetIndex{mask});
  std::sort(groups.begin(), groups.end(), subset_order);
  check_variable_count(n + static_cast<int>(groups.size()));
  Edges edges;
  for (auto g : groups) {
    nodes.push_back(hidden(ancestor_name(g)));
    for (int i : g.members()) edges.emplace_back(ancestor_name(g), "V" + std::to_string(i + 1));
  }
  return Dag::from_edges(std::move(nodes), edges);
}

// ---------------------------------------------------------------------------
// Structural models

inline CptMechanism uniform(int card) {
  return CptMechanism{{std::vector<double>(static_cast<std::size_t>(card), 1.0 / card)}};
}

/// Deterministic function of the parents given as a table over parent rows.
inline FunctionMechanism deterministic(std::vector<int> table) { return FunctionMechanism{{1.0}, std::move(table)}; }

/// V1 = V2 = V3 = U with U a uniform bit.
inline StructuralModel perfect_correlation() {
  return StructuralModel(single_ancestor(), {2, 2, 2, 2},
                         {deterministic({0, 1}), deterministic({0, 1}), deterministic({0, 1}), uniform(2)});
}

/// Each V_i = U xor N_i with independent N_i ~ Bernoulli(q).
inline StructuralModel noisy_correlation(double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw InvalidArgument("flip probability outside [0, 1]");
  const FunctionMechanism flip{{1.0 - q, q}, {0, 1, 1, 0}};
  return StructuralModel(single_ancestor(), {2, 2, 2, 2}, {flip, flip, flip, uniform(2)});
}

/// V2, V3 independent uniform bits and V1 = V2.
inline StructuralModel copy_null() {
  const Dag dag = Dag::from_edges({observed("V1"), observed("V2"), observed("V3")}, Edges{{"V2", "V1"}});
  return StructuralModel(dag, {2, 2, 2}, {deterministic({0, 1}), uniform(2), uniform(2)});
}

/// Z uniform on m values, Y = W = Z and X = Y + W mod m, on the reversed
/// diamond.
inline StructuralModel modular_sum(int m) {
  if (m < 2) throw InvalidArgument("modular sum needs m >= 2");
  std::vector<int> sum;
  for (int y = 0; y < m; ++y)
    for (int w = 0; w < m; ++w) sum.push_back((y + w) % m);
  std::vector<int> copy;
  for (int z = 0; z < m; ++z) copy.push_back(z);
  return StructuralModel(diamond_reversed(), {m, m, m, m},
                         {deterministic(sum), deterministic(copy), deterministic(copy), uniform(m)});
}

// ---------------------------------------------------------------------------
// Known inequalities

inline SubsetIndex v(int i) { return SubsetIndex::singleton(i); }

/// I(Y:Z|X) + I(X:Z) <= H(X) over (X, Y, Z).
inline ConstraintSystem instrumental_inequality() {
  ConstraintSystem sys(3, {"X", "Y", "Z"});
  const auto X = v(0), Y = v(1), Z = v(2);
  sys.add(LinearConstraint::le(I(Y, Z, X) + I(X, Z) - H(X), "instrumental"));
  return sys;
}

/// I(Y:U2) <= H(Y|X) over (X, Y, Z, U, U2) with I(Y:U2) as a named term.
inline ConstraintSystem monogamy_inequality() {
  ConstraintSystem sys(5, {"X", "Y", "Z", "U", "U2"});
  const int t = sys.add_aux({"I(Y:U2)", I(v(1), v(4))});
  sys.add(LinearConstraint::le(LinearExpr::term(Coord::aux(t)) - Hc(v(1), v(0)), "monogamy"));
  return sys;
}

/// The seven pairwise inequalities of the diamond over (X, Y, W, Z).
inline ConstraintSystem diamond_pairwise_inequalities() {
  ConstraintSystem sys(4, {"X", "Y", "W", "Z"});
  const auto X = v(0), Y = v(1), W = v(2), Z = v(3);
  const std::vector<LinearExpr> lhs = {
      H(Y) - H(X) - H(Y | W) + H(X | W),
      H(W) - H(X) - H(Y | W) + H(X | Y),
      H(W | Z) - H(Y | W) - H(X | Z) + H(X | Y),
      H(Y | Z) - H(Y | W) - H(X | Z) + H(X | W),
      H(Y) - H(X) + H(W) - H(W | Z) - H(Y | Z) + H(X | Z),
      H(Z) - H(X) - H(Y | W) - H(X | Z) + H(X | W) + H(X | Y),
      H(Z) + H(X) + H(Y | W) + H(X | Z) - H(X | W) - H(X | Y) - H(W | Z) - H(Y | Z),
  };
  for (std::size_t k = 0; k < lhs.size(); ++k) sys.add(LinearConstraint::le(lhs[k], "pairwise-" + std::to_string(k + 1)));
  return sys;
}

/// Swaps X and Z in a system over (X, Y, W, Z).
inline ConstraintSystem swap_x_z(const ConstraintSystem& sys) {
  ConstraintSystem out(sys.n(), sys.names());
  const Permutation p = {3, 1, 2, 0};
  for (const auto& c : sys.inequalities()) out.add(permute(p, c));
  for (const auto& c : sys.equalities()) out.add(permute(p, c));
  return out;
}

/// I(V1:V2) + I(V1:V3) <= H(V1) and its images under permutations of
/// (V1, V2, V3).
inline ConstraintSystem triangle_inequalities() {
  ConstraintSystem sys(3, {"V1", "V2", "V3"});
  const auto base = LinearConstraint::le(I(v(0), v(1)) + I(v(0), v(2)) - H(v(0)), "triangle");
  for (auto c : orbit(base, scenario_automorphisms(3, {v(0), v(1), v(2)}, SubsetIndex::full(3)))) {
    c.set_label("triangle");
    sys.add(c);
  }
  sys.sort();
  return sys;
}

/// Σ_{i≠j} I(V_i:V_j) <= (m-1) H(V_j) for every j, over V1..Vn.
inline ConstraintSystem ancestor_inequalities(int n, int m) {
  std::vector<std::string> names;
  for (int i = 0; i < n; ++i) names.push_back("V" + std::to_string(i + 1));
  ConstraintSystem sys(n, names);
  for (int j = 0; j < n; ++j) sys.add(ancestor_inequality(n, m, j));
  return sys;
}

/// A lower bound `term >= rhs` as a system over the given variables.
inline ConstraintSystem strength_bound(int n, std::vector<std::string> names, std::string term_name,
                                       LinearExpr term, LinearExpr rhs, std::string label) {
  ConstraintSystem sys(n, std::move(names));
  const int t = sys.add_aux({std::move(term_name), std::move(term)});
  sys.add(LinearConstraint::ge(LinearExpr::term(Coord::aux(t)) - rhs, std::move(label)));
  return sys;
}

/// C(V1->V2) >= I(V1:V2) + I(V1:V3) - H(V1) on the triangle with edge.
inline ConstraintSystem triangle_strength_bound() {
  const Dag d = triangle_with_edge();
  const auto V1 = v(0), V2 = v(1), V3 = v(2);
  const SubsetIndex others = d.parents(1).without(0);
  return strength_bound(6, d.names(), "C(V1->V2)", I(V1, V2, others), I(V1, V2) + I(V1, V3) - H(V1),
                        "strength-triangle");
}

/// C(X->Y) >= I(Y:Z) on the instrumental DAG.
inline ConstraintSystem instrumental_strength_bound() {
  const auto X = v(0), Y = v(1), Z = v(2), U = v(3);
  return strength_bound(4, {"X", "Y", "Z", "U"}, "C(X->Y)", I(X, Y, U), I(Y, Z), "strength-instrumental");
}

/// C(Z->Y) >= I(Y:Z|X) + I(X:Z) - H(X) with a direct edge Z -> Y.
inline ConstraintSystem instrumental_direct_strength_bound() {
  const auto X = v(0), Y = v(1), Z = v(2), U = v(3);
  return strength_bound(4, {"X", "Y", "Z", "U"}, "C(Z->Y)", I(Z, Y, X | U), I(Y, Z, X) + I(X, Z) - H(X),
                        "strength-direct");
}

struct Entry {
  std::string name;
  std::string description;
  ConstraintSystem system;
};

/// Every shipped inequality family.
inline std::vector<Entry> entries() {
  return {
      {"instrumental", "instrumental DAG, observables X, Y, Z", instrumental_inequality()},
      {"monogamy", "U common to X, Y, Z and U2 common to Z, Y; kept term I(Y:U2)", monogamy_inequality()},
      {"diamond-pairwise", "diamond X -> {Y, W} -> Z, pairwise marginals", diamond_pairwise_inequalities()},
      {"diamond-reversed-pairwise", "diamond Z -> {Y, W} -> X, pairwise marginals",
       swap_x_z(diamond_pairwise_inequalities())},
      {"chsh", "any four variables, marginals XY, XW, YZ, WZ", chsh_inequalities()},
      {"triangle", "triangle of pairwise hidden ancestors", triangle_inequalities()},
      {"ancestor-3-2", "common ancestors of at most 2 of 3 observables", ancestor_inequalities(3, 2)},
      {"ancestor-4-2", "common ancestors of at most 2 of 4 observables", ancestor_inequalities(4, 2)},
      {"ancestor-4-3", "common ancestors of at most 3 of 4 observables", ancestor_inequalities(4, 3)},
      {"strength-triangle", "causal strength of V1 -> V2 in the triangle with edge", triangle_strength_bound()},
      {"strength-instrumental", "causal strength of X -> Y in the instrumental DAG", instrumental_strength_bound()},
      {"strength-direct", "causal strength of Z -> Y in the instrumental DAG with Z -> Y",
       instrumental_direct_strength_bound()},
  };
}

}  // namespace entrocone::catalog
