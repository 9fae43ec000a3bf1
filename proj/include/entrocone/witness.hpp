#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "entrocone/cone.hpp"
#include "entrocone/constraint.hpp"
#include "entrocone/dag.hpp"
#include "entrocone/dist.hpp"
#include "entrocone/project.hpp"
#include "entrocone/symmetry.hpp"

namespace entrocone {

/// Default violation tolerance in bits for exact distributions.
inline constexpr double kDefaultTolerance = 1e-9;

enum class Verdict { kSatisfied, kMarginal, kViolated };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::kSatisfied: return "satisfied";
    case Verdict::kMarginal: return "marginal";
    case Verdict::kViolated: return "violated";
  }
  return "?";
}

struct EvaluationResult {
  /// Per constraint (inequalities, then equalities): expression value in
  /// bits. For an inequality `e >= 0` the slack is e; for an equality it is
  /// -|e|.
  std::vector<double> slack;
  std::vector<std::string> labels;
  Verdict verdict = Verdict::kSatisfied;
  std::size_t worst = 0;
  double worst_slack = std::numeric_limits<double>::infinity();
};

/// Evaluates every constraint on h (indexed like the system's variables).
/// Violated iff some slack < -tol; marginal iff not violated and some
/// inequality has |slack| <= tol.
inline EvaluationResult evaluate(const ConstraintSystem& sys, const SetFunction& h, double tol = kDefaultTolerance,
                                 const std::vector<double>& aux = {}) {
  if (h.n() != sys.n()) throw InvalidArgument("entropy vector and system have different variable counts");
  if (aux.size() < sys.aux_terms().size()) {
    for (const auto* list : {&sys.inequalities(), &sys.equalities()})
      for (const auto& c : *list)
        if (c.mentions_aux()) throw InvalidArgument("no value supplied for auxiliary coordinate");
  }
  EvaluationResult res;
  bool tight = false;
  auto consider = [&](const LinearConstraint& c, double s) {
    res.labels.push_back(c.label().empty() ? render(c, sys) : c.label());
    res.slack.push_back(s);
    if (s < res.worst_slack) {
      res.worst_slack = s;
      res.worst = res.slack.size() - 1;
    }
  };
  for (const auto& c : sys.inequalities()) {
    const double s = c.slack(h, aux);
    tight = tight || std::abs(s) <= tol;
    consider(c, s);
  }
  for (const auto& c : sys.equalities()) consider(c, -std::abs(c.slack(h, aux)));
  if (res.worst_slack < -tol)
    res.verdict = Verdict::kViolated;
  else if (tight)
    res.verdict = Verdict::kMarginal;
  return res;
}

/// Entropy vector of `dist` re-indexed to the system's variable names.
/// Variables of the system that are absent from `dist` get no value; any
/// constraint mentioning them (or, with `term_definitions`, mentioning a
/// term whose definition needs them) raises invalid-argument.
inline SetFunction entropy_vector_for(const ConstraintSystem& sys, const JointDistribution& dist,
                                      bool term_definitions = false) {
  std::vector<int> where(static_cast<std::size_t>(sys.n()), -1);
  for (int i = 0; i < sys.n(); ++i)
    for (int k = 0; k < dist.num_vars(); ++k)
      if (dist.names()[k] == sys.names()[i]) where[i] = k;
  SubsetIndex needed;
  for (const auto& c : sys.mentioned_coordinates()) {
    if (!c.is_aux()) {
      needed = needed | c.as_subset();
      continue;
    }
    if (!term_definitions) continue;
    for (const auto& [d, k] : sys.aux_terms().at(static_cast<std::size_t>(c.aux_id())).definition.coeffs())
      if (!d.is_aux()) needed = needed | d.as_subset();
  }
  for (int i : needed.members())
    if (where[i] < 0) throw InvalidArgument("distribution lacks variable " + sys.names()[i]);
  SetFunction h(sys.n());
  for (std::uint32_t m = 1; m < (1u << sys.n()); ++m) {
    const SubsetIndex s{m};
    if (!s.subset_of(needed)) continue;
    SubsetIndex ds;
    for (int i : s.members()) ds = ds.with(where[i]);
    h.set(s, subset_entropy(dist, ds));
  }
  return h;
}

/// Term values come from their definitions, so `dist` must contain the
/// variables those mention.
inline EvaluationResult evaluate(const ConstraintSystem& sys, const JointDistribution& dist,
                                 double tol = kDefaultTolerance) {
  const SetFunction h = entropy_vector_for(sys, dist, true);
  std::vector<double> aux;
  for (const auto& t : sys.aux_terms()) aux.push_back(t.definition.evaluate(h));
  return evaluate(sys, h, tol, aux);
}

/// (m-1) H(V_j) - Σ_{i≠j} I(V_i : V_j) >= 0 over variables 0..n-1
/// (j is a 0-based index).
inline LinearConstraint ancestor_inequality(int n, int m, int j) {
  if (m < 2 || n < 2) throw InvalidArgument("ancestor inequality needs 2 <= m <= n");
  if (m > n) throw InvalidArgument("ancestor inequality needs m <= n");
  if (j < 0 || j >= n) throw InvalidArgument("ancestor inequality: j outside [n]");
  LinearExpr e = Rational(m - 1) * H(SubsetIndex::singleton(j));
  for (int i = 0; i < n; ++i)
    if (i != j) e -= I(SubsetIndex::singleton(i), SubsetIndex::singleton(j));
  return LinearConstraint::ge(std::move(e), "ancestor(n=" + std::to_string(n) + ",m=" + std::to_string(m) +
                                                ",j=" + std::to_string(j + 1) + ")")
      .canonical();
}

/// Entropic CHSH inequalities over (X, Y, W, Z) = variables (0, 1, 2, 3):
/// H_X + H_Y + H_WZ <= H_XY + H_XW + H_YZ and its orbit under the
/// symmetries of the four-cycle X-Y-Z-W-X of jointly measured pairs.
inline ConstraintSystem chsh_inequalities(std::vector<std::string> names = {"X", "Y", "W", "Z"}) {
  const SubsetIndex X = SubsetIndex::singleton(0), Y = SubsetIndex::singleton(1), W = SubsetIndex::singleton(2),
                    Z = SubsetIndex::singleton(3);
  const auto base = LinearConstraint::ge(H(X | Y) + H(X | W) + H(Y | Z) - H(W | Z) - H(Y) - H(X), "chsh");
  const std::vector<SubsetIndex> cycle = {X | Y, Y | Z, Z | W, W | X};
  ConstraintSystem sys(4, std::move(names));
  for (const auto& c : orbit(base, scenario_automorphisms(4, cycle, SubsetIndex::full(4)))) {
    LinearConstraint labelled = c;
    labelled.set_label("chsh");
    sys.add(labelled);
  }
  sys.sort();
  return sys;
}

/// How much of the model an inequality of a projected system depends on.
enum class FacetKind {
  kBasic,          // basic Shannon inequalities on the kept coordinates
  kSubsetShannon,  // also Shannon inequalities within proper subsets of the observables
  kShannon,        // valid for every joint distribution of the observables
  kDagSpecific,    // needs the DAG's independences
};

inline const char* to_string(FacetKind k) {
  switch (k) {
    case FacetKind::kBasic: return "basic";
    case FacetKind::kSubsetShannon: return "subset-shannon";
    case FacetKind::kShannon: return "shannon";
    case FacetKind::kDagSpecific: return "dag-specific";
  }
  return "?";
}

/// Classifies inequalities of a projected system by the weakest premise
/// that implies them. Inequalities with auxiliary terms are basic when Γ_n
/// plus the term definitions implies them and DAG-specific otherwise.
class FacetClassifier {
 public:
  FacetClassifier(const ConstraintSystem& derived, const MarginalScenario& scenario)
      : basic_(basic_inequalities_on(scenario.kept, derived.n(), derived.names())),
        subset_(basic_),
        shannon_(derived.n(), derived.names()),
        dag_free_(elementary_inequalities(derived.n(), derived.names())) {
    SubsetIndex support;
    for (auto s : scenario.kept) support = support | s;
    shannon_ = elementary_inequalities_on(support, derived.n(), derived.names());
    if (support.size() > 1)
      for (int i : support.members()) {
        const auto part = elementary_inequalities_on(support.without(i), derived.n(), derived.names());
        subset_.add_all(part.inequalities());
      }
    dag_free_.set_aux_terms(derived.aux_terms());
    for (int i = 0; i < static_cast<int>(derived.aux_terms().size()); ++i)
      dag_free_.add(LinearConstraint::eq(LinearExpr::term(Coord::aux(i)) - derived.aux_terms()[i].definition));
  }

  FacetKind classify(const LinearConstraint& c) const {
    if (c.mentions_aux()) return implies(dag_free_, c).implied ? FacetKind::kBasic : FacetKind::kDagSpecific;
    if (implies(basic_, c).implied) return FacetKind::kBasic;
    if (implies(subset_, c).implied) return FacetKind::kSubsetShannon;
    if (implies(shannon_, c).implied) return FacetKind::kShannon;
    return FacetKind::kDagSpecific;
  }

  /// Trivial: implied by Shannon inequalities confined to the kept
  /// coordinates or to proper subsets of the observables.
  bool trivial(const LinearConstraint& c) const { return classify(c) < FacetKind::kShannon; }

 private:
  ConstraintSystem basic_;
  ConstraintSystem subset_;
  ConstraintSystem shannon_;
  ConstraintSystem dag_free_;
};

/// The inequalities of `derived` at least as specific as `min_kind`; the
/// default drops the trivial ones.
inline std::vector<LinearConstraint> nontrivial_inequalities(const ConstraintSystem& derived,
                                                             const MarginalScenario& scenario,
                                                             FacetKind min_kind = FacetKind::kShannon) {
  const FacetClassifier classifier(derived, scenario);
  std::vector<LinearConstraint> out;
  for (const auto& c : derived.inequalities())
    if (classifier.classify(c) >= min_kind) out.push_back(c);
  return out;
}

struct CausalStrengthBound {
  std::string source;
  std::string target;
  /// C_{source→target} >= bound (bits); <= 0 means the data imposes nothing.
  double bound = 0.0;
  bool vacuous = true;
  /// Lower-bounding facets, rendered, with the attaining one first.
  std::vector<std::string> derivation;
  /// The lower-bounding facets t >= f_k(h) as expressions f_k.
  std::vector<LinearExpr> lower_bounds;
};

/// Lower-bounding facets t >= f(h) of a projected system, as expressions f.
inline std::vector<LinearExpr> lower_bounds_on_aux(const ConstraintSystem& projected, int aux_id) {
  std::vector<LinearExpr> out;
  auto take = [&](const LinearExpr& e) {
    const Rational k = e.coeff(Coord::aux(aux_id));
    if (sgn(k) <= 0) return;
    // k t + rest >= 0  <=>  t >= -rest / k
    LinearExpr rest = e;
    rest.add(Coord::aux(aux_id), -k);
    out.push_back(Rational(-1) / k * rest);
  };
  for (const auto& c : projected.inequalities()) take(c.expr());
  for (const auto& c : projected.equalities()) {
    take(c.expr());
    take(-c.expr());
  }
  return out;
}

/// Derives lower bounds on C_{source→target} >= I(source : target | other
/// parents of target) in terms of observable entropies, and evaluates the
/// strongest on `dist`.
inline CausalStrengthBound causal_strength_bound(const Dag& dag, const std::string& source, const std::string& target,
                                                 const JointDistribution& dist, const EliminationConfig& cfg = {}) {
  const int s = dag.index_of(source);
  const int t = dag.index_of(target);
  if (!dag.has_edge(s, t)) throw InvalidArgument("edge " + source + "->" + target + " is not in the DAG");
  const SubsetIndex others = dag.parents(t).without(s);
  const LinearExpr term = I(SubsetIndex::singleton(s), SubsetIndex::singleton(t), others);
  const std::string name = "C(" + source + "->" + target + ")";
  const ConstraintSystem projected =
      eliminate_with_term(constrained_cone(dag), scenario_observable(dag), term, name, cfg);

  CausalStrengthBound out;
  out.source = source;
  out.target = target;
  out.lower_bounds = lower_bounds_on_aux(projected, 0);
  if (out.lower_bounds.empty()) return out;
  const SetFunction h = entropy_vector_for(projected, dist);
  std::vector<std::pair<double, std::size_t>> values;
  for (std::size_t k = 0; k < out.lower_bounds.size(); ++k) values.emplace_back(out.lower_bounds[k].evaluate(h), k);
  std::stable_sort(values.begin(), values.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  out.bound = values.front().first;
  out.vacuous = out.bound <= kDefaultTolerance;
  for (const auto& [v, k] : values)
    out.derivation.push_back(name + " >= " + render_information_form(out.lower_bounds[k], projected));
  return out;
}

}  // namespace entrocone
