#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "entrocone/random.hpp"
#include "entrocone/subset.hpp"

namespace entrocone {

struct DagNode {
  std::string name;
  bool observable = true;
};

/// Directed acyclic graph whose nodes are flagged observable or hidden.
/// Node order is the user's declaration order and fixes variable indices.
class Dag {
 public:
  Dag() = default;

  /// Validates names, parent indices and acyclicity.
  Dag(std::vector<DagNode> nodes, std::vector<SubsetIndex> parents)
      : nodes_(std::move(nodes)), parents_(std::move(parents)) {
    if (nodes_.empty()) throw InvalidArgument("DAG has no nodes");
    check_variable_count(static_cast<int>(nodes_.size()));
    if (parents_.size() != nodes_.size()) throw InvalidArgument("parent list size mismatch");
    std::set<std::string> seen;
    for (const auto& nd : nodes_) {
      check_name(nd.name);
      if (!seen.insert(nd.name).second) throw InvalidArgument("duplicate node name: " + nd.name);
    }
    const SubsetIndex all = SubsetIndex::full(size());
    for (int i = 0; i < size(); ++i) {
      if (!parents_[i].subset_of(all)) throw InvalidArgument("parent index out of range");
      if (parents_[i].contains(i)) throw InvalidArgument("self loop at " + nodes_[i].name);
    }
    topo_ = compute_topological_order();
  }

  /// Builds from names and (parent, child) name pairs.
  static Dag from_edges(std::vector<DagNode> nodes,
                        const std::vector<std::pair<std::string, std::string>>& edges) {
    std::vector<SubsetIndex> parents(nodes.size());
    auto find = [&](const std::string& nm) {
      for (std::size_t i = 0; i < nodes.size(); ++i)
        if (nodes[i].name == nm) return static_cast<int>(i);
      throw InvalidArgument("unknown node in edge: " + nm);
    };
    for (const auto& [from, to] : edges) {
      const int f = find(from);
      const int t = find(to);
      parents[t] = parents[t].with(f);
    }
    return Dag(std::move(nodes), std::move(parents));
  }

  int size() const { return static_cast<int>(nodes_.size()); }
  const DagNode& node(int i) const { return nodes_.at(static_cast<std::size_t>(i)); }
  const std::vector<DagNode>& nodes() const { return nodes_; }
  SubsetIndex parents(int i) const { return parents_.at(static_cast<std::size_t>(i)); }
  const std::vector<int>& topological_order() const { return topo_; }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& nd : nodes_) out.push_back(nd.name);
    return out;
  }

  int index_of(const std::string& name) const {
    for (int i = 0; i < size(); ++i)
      if (nodes_[i].name == name) return i;
    throw InvalidArgument("unknown node: " + name);
  }

  SubsetIndex observables() const {
    SubsetIndex s;
    for (int i = 0; i < size(); ++i)
      if (nodes_[i].observable) s = s.with(i);
    return s;
  }

  SubsetIndex children(int i) const {
    SubsetIndex s;
    for (int j = 0; j < size(); ++j)
      if (parents_[j].contains(i)) s = s.with(j);
    return s;
  }

  bool has_edge(int from, int to) const { return parents(to).contains(from); }

  /// Nodes of s together with all their ancestors.
  SubsetIndex ancestral_closure(SubsetIndex s) const {
    SubsetIndex closure = s;
    for (bool grew = true; grew;) {
      grew = false;
      for (int i : closure.members()) {
        const SubsetIndex next = closure | parents(i);
        if (next != closure) {
          closure = next;
          grew = true;
        }
      }
    }
    return closure;
  }

  SubsetIndex descendants(int i) const {
    SubsetIndex d;
    SubsetIndex frontier = children(i);
    while (!frontier.without(d).empty()) {
      d = d | frontier;
      SubsetIndex next;
      for (int c : frontier.members()) next = next | children(c);
      frontier = next;
    }
    return d;
  }

 private:
  std::vector<int> compute_topological_order() const {
    std::vector<int> order;
    SubsetIndex placed;
    while (static_cast<int>(order.size()) < size()) {
      bool progress = false;
      for (int i = 0; i < size(); ++i) {
        if (placed.contains(i) || !parents_[i].subset_of(placed)) continue;
        order.push_back(i);
        placed = placed.with(i);
        progress = true;
      }
      if (!progress) throw InvalidArgument("graph contains a directed cycle");
    }
    return order;
  }

  std::vector<DagNode> nodes_;
  std::vector<SubsetIndex> parents_;
  std::vector<int> topo_;
};

/// The statement a ⊥ b | z over node indices.
struct CiStatement {
  SubsetIndex a;
  SubsetIndex b;
  SubsetIndex z;

  void validate() const {
    if (a.empty() || b.empty()) throw InvalidArgument("CI statement sides must be nonempty");
    if (!a.disjoint(b) || !a.disjoint(z) || !b.disjoint(z))
      throw InvalidArgument("CI statement subsets must be pairwise disjoint");
  }

  /// Orders (a, b) so that a < b, making swapped statements compare equal.
  CiStatement normalized() const {
    return a.mask <= b.mask ? *this : CiStatement{b, a, z};
  }

  auto operator<=>(const CiStatement&) const = default;
};

/// True iff every path between a and b is blocked by z. Decided on the
/// moral graph of the ancestral closure of a ∪ b ∪ z with z removed.
inline bool d_separated(const Dag& dag, SubsetIndex a, SubsetIndex b, SubsetIndex z) {
  if (!a.disjoint(b) || !a.disjoint(z) || !b.disjoint(z))
    throw InvalidArgument("d_separated: subsets must be pairwise disjoint");
  const SubsetIndex all = SubsetIndex::full(dag.size());
  if (!(a | b | z).subset_of(all)) throw InvalidArgument("d_separated: node index out of range");
  if (a.empty() || b.empty()) return true;

  const SubsetIndex anc = dag.ancestral_closure(a | b | z);
  const int n = dag.size();
  std::vector<SubsetIndex> adj(static_cast<std::size_t>(n));
  for (int v : anc.members()) {
    const auto pa = dag.parents(v).members();
    for (int p : pa) {
      adj[v] = adj[v].with(p);
      adj[p] = adj[p].with(v);
    }
    for (std::size_t x = 0; x < pa.size(); ++x)
      for (std::size_t y = x + 1; y < pa.size(); ++y) {
        adj[pa[x]] = adj[pa[x]].with(pa[y]);
        adj[pa[y]] = adj[pa[y]].with(pa[x]);
      }
  }

  const SubsetIndex allowed = anc.without(z);
  SubsetIndex reached = a;
  SubsetIndex frontier = a;
  while (!frontier.empty()) {
    SubsetIndex next;
    for (int v : frontier.members()) next = next | (adj[v] & allowed);
    next = next.without(reached);
    if (!next.disjoint(b)) return false;
    reached = reached | next;
    frontier = next;
  }
  return true;
}

enum class CiMode { kPairwiseSingleton, kSaturated };

/// Enumerates the d-separation statements implied by the DAG, deduplicated
/// under (a, b) swap and returned in a deterministic order.
inline std::vector<CiStatement> ci_constraints(const Dag& dag, CiMode mode = CiMode::kPairwiseSingleton) {
  const int n = dag.size();
  std::set<CiStatement> out;
  if (mode == CiMode::kPairwiseSingleton) {
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        const SubsetIndex rest = SubsetIndex::full(n).without(i).without(j);
        // enumerate all subsets of rest
        std::uint32_t sub = 0;
        do {
          const SubsetIndex z{sub};
          if (d_separated(dag, SubsetIndex::singleton(i), SubsetIndex::singleton(j), z))
            out.insert(CiStatement{SubsetIndex::singleton(i), SubsetIndex::singleton(j), z});
          sub = (sub - rest.mask) & rest.mask;
        } while (sub != 0);
      }
  } else {
    if (n > 10) throw ResourceLimit("saturated CI enumeration is capped at 10 nodes");
    // assign each node to a, b, z or none (base-4 digits)
    std::uint64_t total = 1;
    for (int i = 0; i < n; ++i) total *= 4;
    for (std::uint64_t code = 0; code < total; ++code) {
      SubsetIndex a, b, z;
      std::uint64_t c = code;
      for (int i = 0; i < n; ++i, c /= 4) {
        switch (c % 4) {
          case 1: a = a.with(i); break;
          case 2: b = b.with(i); break;
          case 3: z = z.with(i); break;
          default: break;
        }
      }
      if (a.empty() || b.empty() || a.mask > b.mask) continue;
      if (d_separated(dag, a, b, z)) out.insert(CiStatement{a, b, z});
    }
  }
  return {out.begin(), out.end()};
}

/// Local Markov statements: each node against its non-descendant
/// non-parents given its parents (skipped when that set is empty).
inline std::vector<CiStatement> local_markov_statements(const Dag& dag) {
  std::vector<CiStatement> out;
  for (int i = 0; i < dag.size(); ++i) {
    const SubsetIndex nd = SubsetIndex::full(dag.size())
                               .without(dag.descendants(i))
                               .without(dag.parents(i))
                               .without(i);
    if (!nd.empty())
      out.push_back(CiStatement{SubsetIndex::singleton(i), nd, dag.parents(i)}.normalized());
  }
  return out;
}

/// Explicit conditional probability table. Row r holds p(x | parents = r),
/// where r enumerates parent configurations row-major over the parents in
/// ascending node index (last parent fastest).
struct CptMechanism {
  std::vector<std::vector<double>> rows;
};

/// Deterministic function of (parent configuration, noise value). The noise
/// is an independent input with the given distribution; outputs[r * |noise|
/// + e] is the node's value for parent configuration r and noise value e.
struct FunctionMechanism {
  std::vector<double> noise;
  std::vector<int> outputs;
};

using Mechanism = std::variant<CptMechanism, FunctionMechanism>;

/// A DAG with per-node cardinalities and mechanisms; samples from the
/// factorization p(x) = Π p(x_i | pa_i).
class StructuralModel {
 public:
  StructuralModel(Dag dag, std::vector<int> cardinalities, std::vector<Mechanism> mechanisms)
      : dag_(std::move(dag)), cards_(std::move(cardinalities)), mechs_(std::move(mechanisms)) {
    const auto n = static_cast<std::size_t>(dag_.size());
    if (cards_.size() != n || mechs_.size() != n)
      throw InvalidArgument("model needs one cardinality and mechanism per node");
    for (int c : cards_)
      if (c < 1) throw InvalidArgument("cardinalities must be positive");
    for (int i = 0; i < dag_.size(); ++i) validate_mechanism(i);
  }

  const Dag& dag() const { return dag_; }
  const std::vector<int>& cardinalities() const { return cards_; }
  const Mechanism& mechanism(int i) const { return mechs_.at(static_cast<std::size_t>(i)); }
  int size() const { return dag_.size(); }

  /// Number of parent configurations of node i.
  std::size_t parent_configurations(int i) const {
    std::size_t k = 1;
    for (int p : dag_.parents(i).members()) k *= static_cast<std::size_t>(cards_[p]);
    return k;
  }

  /// Row index of node i's parent configuration within a full assignment.
  std::size_t parent_row(int i, const int* values) const {
    std::size_t r = 0;
    for (int p : dag_.parents(i).members()) r = r * static_cast<std::size_t>(cards_[p]) + static_cast<std::size_t>(values[p]);
    return r;
  }

  /// Conditional distribution p(x_i | parents = row) as a dense vector.
  std::vector<double> conditional(int i, std::size_t row) const {
    const int card = cards_[i];
    return std::visit(
        [&](const auto& m) -> std::vector<double> {
          using M = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<M, CptMechanism>) {
            return m.rows[row];
          } else {
            std::vector<double> p(static_cast<std::size_t>(card), 0.0);
            for (std::size_t e = 0; e < m.noise.size(); ++e)
              p[static_cast<std::size_t>(m.outputs[row * m.noise.size() + e])] += m.noise[e];
            return p;
          }
        },
        mechs_[i]);
  }

  /// Draws one value of node i given a partial assignment that already
  /// holds its parents.
  int draw(int i, const int* values, StreamRng& rng) const {
    const std::size_t row = parent_row(i, values);
    return std::visit(
        [&](const auto& m) -> int {
          using M = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<M, CptMechanism>) {
            return categorical(m.rows[row], rng.uniform());
          } else {
            const int e = categorical(m.noise, rng.uniform());
            return m.outputs[row * m.noise.size() + static_cast<std::size_t>(e)];
          }
        },
        mechs_[i]);
  }

 private:
  static int categorical(const std::vector<double>& p, double u) {
    double acc = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
      acc += p[k];
      if (u < acc) return static_cast<int>(k);
    }
    // u landed in the rounding gap above the cumulative sum
    for (std::size_t k = p.size(); k-- > 0;)
      if (p[k] > 0.0) return static_cast<int>(k);
    return 0;
  }

  static void check_normalized(const std::vector<double>& p, const std::string& what) {
    double s = 0.0;
    for (double v : p) {
      if (!(v >= 0.0)) throw InvalidArgument(what + ": negative or NaN probability");
      s += v;
    }
    if (std::abs(s - 1.0) > 1e-12) throw InvalidArgument(what + ": probabilities do not sum to 1");
  }

  void validate_mechanism(int i) {
    const std::string& nm = dag_.node(i).name;
    const std::size_t rows = parent_configurations(i);
    const auto card = static_cast<std::size_t>(cards_[i]);
    std::visit(
        [&](const auto& m) {
          using M = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<M, CptMechanism>) {
            if (m.rows.size() != rows)
              throw InvalidArgument(nm + ": CPT needs " + std::to_string(rows) + " rows");
            for (const auto& r : m.rows) {
              if (r.size() != card) throw InvalidArgument(nm + ": CPT row width != cardinality");
              check_normalized(r, nm);
            }
          } else {
            if (m.noise.empty()) throw InvalidArgument(nm + ": empty noise distribution");
            check_normalized(m.noise, nm + " noise");
            if (m.outputs.size() != rows * m.noise.size())
              throw InvalidArgument(nm + ": function table size mismatch");
            for (int v : m.outputs)
              if (v < 0 || static_cast<std::size_t>(v) >= card)
                throw InvalidArgument(nm + ": function output outside cardinality");
          }
        },
        mechs_[i]);
  }

  Dag dag_;
  std::vector<int> cards_;
  std::vector<Mechanism> mechs_;
};

/// Row-major table of joint outcomes, one row per draw.
struct SampleTable {
  int num_vars = 0;
  std::vector<int> values;

  std::size_t rows() const { return num_vars == 0 ? 0 : values.size() / static_cast<std::size_t>(num_vars); }
  const int* row(std::size_t r) const { return values.data() + r * static_cast<std::size_t>(num_vars); }
  int at(std::size_t r, int var) const { return row(r)[var]; }
};

/// Draws `count` i.i.d. joint outcomes. Draw k uses Philox stream
/// (seed, kSample, first_index + k), so any split of the index range yields
/// the same rows.
inline SampleTable sample(const StructuralModel& model, std::size_t count, std::uint64_t seed,
                          std::size_t first_index = 0) {
  SampleTable out;
  out.num_vars = model.size();
  out.values.resize(count * static_cast<std::size_t>(model.size()));
  for (std::size_t k = 0; k < count; ++k) {
    StreamRng rng(seed, StreamFamily::kSample, static_cast<std::uint32_t>(first_index + k));
    int* vals = out.values.data() + k * static_cast<std::size_t>(model.size());
    for (int i : model.dag().topological_order()) vals[i] = model.draw(i, vals, rng);
  }
  return out;
}

}  // namespace entrocone
