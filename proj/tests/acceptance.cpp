// Acceptance checks: one PASS/FAIL line per criterion, details indented
// below it. Exit status is 0 when every criterion passes or fails only in
// the known-unattainable way recorded for criterion 6.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <unistd.h>

#include "cli.hpp"
#include "entrocone/catalog.hpp"

using namespace entrocone;
namespace fs = std::filesystem;

namespace {

const std::string kSource = ENTROCONE_SOURCE_DIR;

struct Outcome {
  bool pass = false;
  bool known_unattainable = false;
  std::vector<std::string> details;
  void note(const std::string& s) { details.push_back(s); }
};

std::string fmt(double x, int digits = 6) {
  if (x == 0.0) x = 0.0;
  std::ostringstream os;
  os.precision(digits);
  os << x;
  return os.str();
}

bool contains(const std::vector<LinearConstraint>& list, const LinearConstraint& c) {
  for (const auto& d : list)
    if (d.same_as(c)) return true;
  return false;
}

bool same_set(const std::vector<LinearConstraint>& a, const std::vector<LinearConstraint>& b) {
  if (a.size() != b.size()) return false;
  for (const auto& c : a)
    if (!contains(b, c)) return false;
  return true;
}

fs::path build_dir() { return fs::read_symlink("/proc/self/exe").parent_path(); }

Outcome instrumental() {
  Outcome o;
  const fs::path out = fs::temp_directory_path() / ("entrocone_acceptance_" + std::to_string(::getpid()) + ".json");
  std::ostringstream sink, err;
  const int code = cli::run({"derive", kSource + "/data/instrumental.json", "--observe", "X,Y,Z", "--nontrivial-only",
                             "--out", out.string()},
                            sink, err);
  if (code != 0) {
    o.note("derive exited with " + std::to_string(code) + ": " + err.str());
    return o;
  }
  const auto sys = io::system_from_json(io::read_json_file(out.string()));
  fs::remove(out);
  fs::remove(cli::manifest_path_for(out.string()));
  const auto classes = facet_classes(sys.inequalities(), dag_automorphisms(catalog::instrumental()));
  const auto expected = catalog::instrumental_inequality().inequalities()[0];
  o.note("non-trivial inequalities: " + std::to_string(sys.inequalities().size()) +
         ", facet classes: " + std::to_string(classes.size()));
  for (const auto& c : sys.inequalities()) o.note(render(c, sys));
  o.pass = classes.size() == 1 && sys.inequalities().size() == 1 && sys.inequalities()[0].same_as(expected);
  return o;
}

Outcome monogamy() {
  Outcome o;
  const Dag dag = catalog::instrumental_confounded();
  const auto sc = scenario_observable(dag);
  const SubsetIndex Y = SubsetIndex::singleton(dag.index_of("Y")), U2 = SubsetIndex::singleton(dag.index_of("U2"));
  const auto out = eliminate_with_term(constrained_cone(dag), sc, I(Y, U2), "I(Y:U2)");
  std::vector<LinearConstraint> on_term;
  for (const auto& c : nontrivial_inequalities(out, sc))
    if (c.mentions_aux()) on_term.push_back(c);
  const auto expected = catalog::monogamy_inequality().inequalities()[0];
  o.note("non-trivial bounds on I(Y:U2): " + std::to_string(on_term.size()));
  for (const auto& c : on_term) o.note(render(c, out));
  const auto without = nontrivial_inequalities(eliminate(constrained_cone(dag), sc).first, sc);
  o.note("without the term, non-trivial inequalities on (X, Y, Z): " + std::to_string(without.size()));

  // U still reaches Z, so capping I(Y:U2) leaves (X, Y, Z) unconstrained
  const auto relaxed = add_epsilon_constraint(constrained_cone(dag), {Y, U2, {}}, Rational(1, 10));
  const auto projected = eliminate(relaxed, sc).first;
  o.note("with I(Y:U2) <= 1/10 imposed, non-trivial inequalities on (X, Y, Z): " +
         std::to_string(nontrivial_inequalities(projected, sc).size()));

  o.pass = on_term.size() == 1 && on_term[0].same_as(expected) && without.empty();
  return o;
}

Outcome diamond() {
  Outcome o;
  const auto sc = scenario_pairwise(4, {0, 1, 2, 3});
  const auto a = nontrivial_inequalities(eliminate(constrained_cone(catalog::diamond()), sc).first, sc);
  const auto b = nontrivial_inequalities(eliminate(constrained_cone(catalog::diamond_reversed()), sc).first, sc);
  const auto family = catalog::diamond_pairwise_inequalities();
  const auto swapped = catalog::swap_x_z(family);
  const bool listed = same_set(a, family.inequalities());
  const bool exchanged = same_set(b, swapped.inequalities());
  std::size_t invariant = 0, shared = 0;
  std::string which;
  for (std::size_t k = 0; k < family.inequalities().size(); ++k) {
    if (family.inequalities()[k].same_as(swapped.inequalities()[k])) {
      ++invariant;
      which = family.inequalities()[k].label();
    }
    if (contains(b, family.inequalities()[k])) ++shared;
  }
  o.note("DAG (a): " + std::to_string(a.size()) + " non-trivial, equal to the listed seven: " + (listed ? "yes" : "no"));
  o.note("DAG (b): " + std::to_string(b.size()) + " non-trivial, equal to the X<->Z image: " + (exchanged ? "yes" : "no"));
  o.note("invariant under X<->Z: " + std::to_string(invariant) + " (" + which + ")");
  o.note("set intersection of the two families: " + std::to_string(shared) +
         " (rows 3 and 4 are exchanged with each other, so both hold for both DAGs)");
  o.pass = listed && exchanged && invariant == 1 && which == "pairwise-7";
  return o;
}

Outcome chsh() {
  Outcome o;
  const auto names = std::vector<std::string>{"X", "Y", "W", "Z"};
  const SubsetIndex X{1}, Y{2}, W{4}, Z{8};
  const auto sc = make_scenario(4, {X | Y, X | W, Y | Z, W | Z});
  const auto facets = eliminate(elementary_inequalities(4, names), sc).first;
  const auto family = chsh_inequalities();
  const auto group = scenario_automorphisms(4, sc.kept, SubsetIndex::full(4));
  const auto orbit_of = orbit(family.inequalities()[0], group);
  bool all_found = true, all_implied = true;
  for (const auto& c : orbit_of) {
    all_found = all_found && contains(facets.inequalities(), c);
    all_implied = all_implied && implies(elementary_inequalities(4), c).implied;
  }
  o.note("facets of the projection: " + std::to_string(facets.inequalities().size()));
  o.note("orbit size " + std::to_string(orbit_of.size()) + ", all facets: " + (all_found ? "yes" : "no") +
         ", all implied by elementary inequalities: " + (all_implied ? "yes" : "no"));
  o.note(render(family.inequalities()[0], family));
  o.pass = orbit_of.size() == 4 && same_set(orbit_of, family.inequalities()) && all_found && all_implied;
  return o;
}

Outcome triangle() {
  Outcome o;
  const Dag dag = catalog::triangle();
  const auto sc = scenario_observable(dag);
  EliminationConfig cfg;
  cfg.max_inequalities = 200000;
  const auto [out, report] = eliminate(constrained_cone(dag), sc, cfg);
  const auto nt = nontrivial_inequalities(out, sc);
  std::size_t peak = report.input_inequalities;
  for (const auto& s : report.steps) peak = std::max({peak, s.generated, s.after});
  const auto family = catalog::triangle_inequalities();
  bool all = true;
  for (const auto& c : family.inequalities()) all = all && contains(nt, c);
  o.note("facets " + std::to_string(out.inequalities().size()) + ", non-trivial " + std::to_string(nt.size()) +
         ", peak intermediate rows " + std::to_string(peak) + ", substituted equalities " +
         std::to_string(report.substituted_equalities));
  o.pass = all && family.inequalities().size() == 3;
  return o;
}

Outcome violation() {
  Outcome o;
  const auto joint = model_distribution(catalog::perfect_correlation());
  const auto tri = evaluate(catalog::triangle_inequalities(), marginalize(joint, SubsetIndex{0b0111}));
  const bool eq9 = std::abs(tri.worst_slack + 1.0) <= 1e-9;
  o.note("perfect correlation on the triangle family: worst slack " + fmt(tri.worst_slack, 12));

  const auto family = catalog::diamond_pairwise_inequalities();
  LinearConstraint first;
  for (const auto& c : family.inequalities())
    if (c.label() == "pairwise-1") first = c;
  bool required = eq9, odd_as_predicted = true, odd_violated = true;
  for (int m : {2, 3, 4, 5}) {
    const auto h = entropy_vector(model_distribution(catalog::modular_sum(m)));
    const double le_slack = -first.slack(h);  // lhs of the <= form
    const double predicted = m % 2 == 0 ? 1.0 : 0.0;
    std::string line = "m = " + std::to_string(m) + ": first pairwise inequality, lhs of <= form = " + fmt(le_slack, 12);
    if (m == 2) required = required && std::abs(le_slack - 1.0) <= 1e-9;
    if (m == 4) required = required && le_slack > 1e-9;
    if (m % 2 == 1) {
      odd_violated = odd_violated && le_slack > 1e-9;
      odd_as_predicted = odd_as_predicted && std::abs(le_slack - predicted) <= 1e-9;
      line += le_slack > 1e-9 ? " (violated)" : " (NOT violated: X = 2Z mod m is a bijection of Z for odd m)";
    } else {
      line += le_slack > 1e-9 ? " (violated)" : " (not violated)";
    }
    o.note(line);
  }
  o.pass = required && odd_violated;
  o.known_unattainable = !o.pass && required && odd_as_predicted;
  if (o.known_unattainable)
    o.note("unattainable as stated: the lhs equals log2 gcd(2, m), which is 0 for m = 3 and 5");
  return o;
}

Outcome ancestors() {
  Outcome o;
  bool ok = true;
  for (int n : {3, 4}) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto cone = constrained_cone(catalog::common_ancestor_dag(n, 2));
    int implied = 0;
    for (int j = 0; j < n; ++j) implied += implies(cone, ancestor_inequality(n, 2, j)).implied ? 1 : 0;
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.note("n = " + std::to_string(n) + ", m = 2: " + std::to_string(implied) + "/" + std::to_string(n) +
           " implied by the cone (" + fmt(s, 3) + " s)");
    ok = ok && implied == n;
  }
  for (const auto& [n, m] : {std::pair{3, 2}, {4, 2}, {4, 3}}) {
    const Dag dag = catalog::common_ancestor_dag(n, m);
    const auto family = catalog::ancestor_inequalities(n, m);
    StreamRng rng(2024, StreamFamily::kFuzz, static_cast<std::uint32_t>(10 * n + m));
    double worst = std::numeric_limits<double>::infinity();
    for (int t = 0; t < 200; ++t) {
      std::vector<Mechanism> mechs;
      std::vector<int> cards(static_cast<std::size_t>(dag.size()));
      for (auto& c : cards) c = 2 + static_cast<int>(rng.below(2));
      for (int i = 0; i < dag.size(); ++i) {
        std::size_t rows = 1;
        for (int p : dag.parents(i).members()) rows *= static_cast<std::size_t>(cards[p]);
        CptMechanism cpt;
        for (std::size_t r = 0; r < rows; ++r) {
          std::vector<double> p(static_cast<std::size_t>(cards[i]));
          double sum = 0.0;
          for (auto& x : p) sum += x = rng.uniform() < 0.3 ? 0.0 : -std::log(1.0 - rng.uniform());
          if (sum == 0.0) p[0] = sum = 1.0;
          for (auto& x : p) x /= sum;
          cpt.rows.push_back(std::move(p));
        }
        mechs.emplace_back(std::move(cpt));
      }
      const auto joint = model_distribution(StructuralModel(dag, cards, std::move(mechs)));
      worst = std::min(worst, evaluate(family, joint).worst_slack);
    }
    o.note("(n, m) = (" + std::to_string(n) + ", " + std::to_string(m) + "): worst slack over 200 models " +
           fmt(worst, 6));
    ok = ok && worst >= -1e-9;
  }
  o.pass = ok;
  return o;
}

// lower_bounds_on_aux returns t >= f; the expected f is matched exactly.
bool has_bound(const CausalStrengthBound& b, const LinearExpr& expected) {
  for (const auto& f : b.lower_bounds)
    if (f == expected) return true;
  return false;
}

Outcome strength() {
  Outcome o;
  auto rhs = [](const ConstraintSystem& sys) {
    LinearExpr e = sys.inequalities()[0].expr();
    const Rational k = e.coeff(Coord::aux(0));
    e.add(Coord::aux(0), -k);
    return Rational(-1) / k * e;
  };
  const auto joint = model_distribution(catalog::perfect_correlation());
  const auto tri = causal_strength_bound(catalog::triangle_with_edge(), "V1", "V2", marginalize(joint, SubsetIndex{0b0111}));
  const bool eq12 = has_bound(tri, rhs(catalog::triangle_strength_bound()));
  o.note("triangle with edge: bound " + fmt(tri.bound, 12) + ", listed bound derived: " + (eq12 ? "yes" : "no"));
  if (!tri.derivation.empty()) o.note(tri.derivation.front());

  const JointDistribution any({"X", "Y", "Z"}, {2, 2, 2}, std::vector<double>(8, 0.125));
  const auto ins = causal_strength_bound(catalog::instrumental(), "X", "Y", any);
  const bool iyz = has_bound(ins, rhs(catalog::instrumental_strength_bound()));
  o.note(std::string("instrumental X->Y >= I(Y:Z) derived: ") + (iyz ? "yes" : "no"));
  const auto direct = causal_strength_bound(catalog::instrumental_with_direct_edge(), "Z", "Y", any);
  const bool eq13 = has_bound(direct, rhs(catalog::instrumental_direct_strength_bound()));
  o.note(std::string("instrumental with Z->Y, Z->Y bound derived: ") + (eq13 ? "yes" : "no"));
  o.pass = eq12 && iyz && eq13 && std::abs(tri.bound - 1.0) <= 1e-9;
  return o;
}

TestSpec triangle_test(std::size_t samples) {
  const SubsetIndex V1{1}, V2{2}, V3{4};
  TestSpec spec;
  spec.constraint = LinearConstraint::le(I(V1, V2) + I(V1, V3) - H(V1));
  spec.variables = {"V1", "V2", "V3"};
  spec.samples = samples;
  return spec;
}

Outcome calibration() {
  Outcome o;
  const auto spec = triangle_test(50);
  const auto res = calibrate(spec, catalog::copy_null(), 100000, 20120704, 4);
  o.note("t = " + fmt(res.critical_value) + " (standard error " + fmt(res.standard_error) + ", rejection rate " +
         fmt(res.rejection_rate) + ", " + std::to_string(res.runs) + " runs)");
  o.pass = std::abs(res.critical_value - 0.0578) <= 0.003;
  return o;
}

Outcome power() {
  Outcome o;
  const auto spec = triangle_test(50);
  std::vector<double> grid;
  for (int k = 0; k <= 10; ++k) grid.push_back(0.05 * k);
  const auto curve = power_curve(spec, 0.0578, catalog::noisy_correlation, grid, 10000, 7, 4);
  bool monotone = true;
  std::string row;
  for (std::size_t g = 0; g < curve.size(); ++g) {
    row += fmt(curve[g].power, 4) + (g + 1 < curve.size() ? " " : "");
    if (g > 0) {
      const double se = std::hypot(curve[g].standard_error, curve[g - 1].standard_error);
      monotone = monotone && curve[g].power <= curve[g - 1].power + 2 * se;
    }
  }
  o.note("q = 0, 0.05, ..., 0.5: " + row);
  o.pass = curve.front().power == 1.0 && curve.back().power <= 0.10 && monotone;
  return o;
}

Outcome properties() {
  Outcome o;
  const std::vector<std::pair<std::string, std::string>> suites = {
      {"test_cone", "ElementaryInequalities.FuzzOnRandomDistributions:Implies.MatchesExtremeRayOracle"},
      {"test_project",
       "Eliminate.SoundOnEntropicPoints:Eliminate.OrderIndependentAndIdempotent:Eliminate.ThreadCountDoesNotChangeResult"},
      {"test_stats", "Simulate.SeedsAndThreads:Calibrate.DeterministicAcrossThreads"},
      {"test_cli", "Cli.DeriveIndependentOfThreads"},
  };
  bool ok = true;
  for (const auto& [exe, filter] : suites) {
    const std::string cmd = (build_dir() / exe).string() + " --gtest_brief=1 --gtest_filter='" + filter + "' > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    o.note(exe + " [" + filter + "]: " + (rc == 0 ? "pass" : "FAIL"));
    ok = ok && rc == 0;
  }
  o.pass = ok;
  return o;
}

}  // namespace

int main() {
  const std::vector<std::tuple<int, std::string, double, std::function<Outcome()>>> criteria = {
      {1, "instrumental inequality is the only non-trivial facet class", 10, instrumental},
      {2, "monogamy bound on I(Y:U2)", 60, monogamy},
      {3, "seven pairwise inequalities and the X<->Z exchange", 60, diamond},
      {4, "CHSH orbit among the facets, valid for any distribution", 60, chsh},
      {5, "triangle orbit among the non-trivial facets", 1800, triangle},
      {6, "violation by perfect correlation and modular sums", 0, violation},
      {7, "common-ancestor inequalities implied and never violated", 600, ancestors},
      {8, "causal-strength bounds", 0, strength},
      {9, "critical value 0.0578 +- 0.003", 300, calibration},
      {10, "power curve endpoints and monotonicity", 0, power},
      {11, "property suites", 0, properties},
  };
  int hard_failures = 0;
  for (const auto& [id, title, budget, check] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o.note(std::string("exception: ") + e.what());
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = budget == 0 || s < budget;
    if (!in_time) o.note("over the " + fmt(budget) + " s budget");
    const bool pass = o.pass && in_time;
    std::printf("%s  criterion %2d: %s (%.2f s)%s\n", pass ? "PASS" : "FAIL", id, title.c_str(), s,
                !pass && o.known_unattainable ? "  [known unattainable]" : "");
    for (const auto& d : o.details) std::printf("      %s\n", d.c_str());
    std::fflush(stdout);
    if (!pass && !(o.known_unattainable && in_time)) ++hard_failures;
  }
  return hard_failures == 0 ? 0 : 1;
}
