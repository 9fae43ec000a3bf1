#pragma once

#include <algorithm>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "entrocone/constraint.hpp"
#include "entrocone/dag.hpp"

namespace entrocone {

/// A permutation of variable indices: perm[i] is the image of i.
using Permutation = std::vector<int>;

inline SubsetIndex permute(const Permutation& p, SubsetIndex s) {
  SubsetIndex out;
  for (int i : s.members()) out = out.with(p[i]);
  return out;
}

inline LinearExpr permute(const Permutation& p, const LinearExpr& e) {
  LinearExpr out(e.constant());
  for (const auto& [c, k] : e.coeffs()) out.add(c.is_aux() ? c : Coord::subset(permute(p, c.as_subset())), k);
  return out;
}

inline LinearConstraint permute(const Permutation& p, const LinearConstraint& c) {
  return LinearConstraint(permute(p, c.expr()), c.kind(), c.label()).canonical();
}

/// Node permutations preserving edges and observable flags (backtracking
/// search; graphs above 12 nodes report the identity only).
inline std::vector<Permutation> dag_automorphisms(const Dag& dag) {
  const int n = dag.size();
  Permutation id(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) id[i] = i;
  if (n > 12) return {id};
  std::vector<Permutation> out;
  Permutation p(static_cast<std::size_t>(n), -1);
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  std::function<void(int)> rec = [&](int i) {
    if (i == n) {
      out.push_back(p);
      return;
    }
    for (int j = 0; j < n; ++j) {
      if (used[j] || dag.node(i).observable != dag.node(j).observable) continue;
      if (dag.parents(i).size() != dag.parents(j).size() || dag.children(i).size() != dag.children(j).size()) continue;
      bool ok = true;
      for (int k = 0; k < i && ok; ++k) ok = dag.has_edge(k, i) == dag.has_edge(p[k], j) && dag.has_edge(i, k) == dag.has_edge(j, p[k]);
      if (!ok) continue;
      p[i] = j;
      used[j] = true;
      rec(i + 1);
      used[j] = false;
      p[i] = -1;
    }
  };
  rec(0);
  return out;
}

/// Variable permutations that map the given family of subsets onto itself.
inline std::vector<Permutation> scenario_automorphisms(int n, const std::vector<SubsetIndex>& kept,
                                                       SubsetIndex movable) {
  std::vector<Permutation> out;
  std::set<std::uint32_t> fam;
  for (auto s : kept) fam.insert(s.mask);
  Permutation p(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) p[i] = i;
  const auto mv = movable.members();
  std::vector<int> images = mv;
  std::sort(images.begin(), images.end());
  do {
    for (std::size_t k = 0; k < mv.size(); ++k) p[mv[k]] = images[k];
    bool ok = true;
    for (auto s : kept) {
      if (!fam.count(permute(p, s).mask)) {
        ok = false;
        break;
      }
    }
    if (ok) out.push_back(p);
  } while (std::next_permutation(images.begin(), images.end()));
  return out;
}

/// Distinct images of a constraint under a group of permutations.
inline std::vector<LinearConstraint> orbit(const LinearConstraint& c, const std::vector<Permutation>& group) {
  std::vector<LinearConstraint> out;
  for (const auto& p : group) {
    LinearConstraint img = permute(p, c);
    bool dup = false;
    for (const auto& o : out) dup = dup || o.same_as(img);
    if (!dup) out.push_back(std::move(img));
  }
  std::sort(out.begin(), out.end(), constraint_order);
  return out;
}

struct FacetClass {
  LinearConstraint representative;  // first member in constraint order
  std::size_t orbit_size = 0;
  std::vector<std::size_t> members;  // indices into the input list
};

/// Groups constraints into orbits under the group; constraints whose
/// images leave the list are grouped by the images that are present.
inline std::vector<FacetClass> facet_classes(const std::vector<LinearConstraint>& cs,
                                             const std::vector<Permutation>& group) {
  std::vector<FacetClass> classes;
  std::vector<bool> assigned(cs.size(), false);
  for (std::size_t i = 0; i < cs.size(); ++i) {
    if (assigned[i]) continue;
    FacetClass fc;
    fc.representative = cs[i];
    for (const auto& img : orbit(cs[i], group))
      for (std::size_t j = 0; j < cs.size(); ++j)
        if (!assigned[j] && cs[j].same_as(img)) {
          assigned[j] = true;
          fc.members.push_back(j);
        }
    fc.orbit_size = fc.members.size();
    classes.push_back(std::move(fc));
  }
  return classes;
}

}  // namespace entrocone
