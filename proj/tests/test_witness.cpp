#include <gtest/gtest.h>

#include <cmath>

#include "entrocone/catalog.hpp"
#include "entrocone/cone.hpp"
#include "entrocone/project.hpp"
#include "entrocone/witness.hpp"
#include "test_util.hpp"

using namespace entrocone;

namespace {

double h2(double p) { return p <= 0.0 || p >= 1.0 ? 0.0 : -p * std::log2(p) - (1 - p) * std::log2(1 - p); }

// Uniform U copied to every observable.
JointDistribution perfect(int n) {
  std::vector<double> p(static_cast<std::size_t>(1) << n, 0.0);
  p.front() = p.back() = 0.5;
  std::vector<std::string> names;
  for (int i = 0; i < n; ++i) names.push_back("V" + std::to_string(i + 1));
  return JointDistribution(names, std::vector<int>(static_cast<std::size_t>(n), 2), p);
}

JointDistribution independent_bits(const std::vector<std::string>& names) {
  const std::size_t cells = std::size_t{1} << names.size();
  return JointDistribution(names, std::vector<int>(names.size(), 2), std::vector<double>(cells, 1.0 / cells));
}

bool contains(const std::vector<LinearConstraint>& list, const LinearConstraint& c) {
  for (const auto& o : list)
    if (o.same_as(c)) return true;
  return false;
}

}  // namespace

TEST(Evaluate, TriangleFamilyOnExtremes) {
  const auto tri = catalog::triangle_inequalities();
  const auto bad = evaluate(tri, perfect(3));
  EXPECT_EQ(bad.verdict, Verdict::kViolated);
  EXPECT_NEAR(bad.worst_slack, -1.0, 1e-12);
  for (double s : bad.slack) EXPECT_NEAR(s, -1.0, 1e-12);
  const auto good = evaluate(tri, independent_bits({"V1", "V2", "V3"}));
  EXPECT_EQ(good.verdict, Verdict::kSatisfied);
  for (double s : good.slack) EXPECT_NEAR(s, 1.0, 1e-12);
}

// Closed form for V_i = U xor N_i with N_i ~ Bernoulli(q): pairwise
// disagreement p = 2q(1-q), slack 1 - 2(1 - h(p)).
TEST(Evaluate, NoisyCorrelationClosedForm) {
  for (double q : {0.0, 0.05, 0.1, 0.2, 0.3, 0.5}) {
    const auto dist = marginalize(model_distribution(catalog::noisy_correlation(q)), SubsetIndex{0b0111});
    const auto res = evaluate(catalog::triangle_inequalities(), dist);
    const double p = 2 * q * (1 - q);
    for (double s : res.slack) EXPECT_NEAR(s, 2 * h2(p) - 1, 1e-9) << q;
  }
}

TEST(Evaluate, MarginalAndEqualities) {
  ConstraintSystem sys(2, {"A", "B"});
  sys.add(LinearConstraint::ge(I(SubsetIndex{1}, SubsetIndex{2})));
  EXPECT_EQ(evaluate(sys, independent_bits({"A", "B"})).verdict, Verdict::kMarginal);
  ConstraintSystem eq(2, {"A", "B"});
  eq.add(LinearConstraint::eq(H(SubsetIndex{1}) - H(SubsetIndex{2})));
  const JointDistribution skew({"A", "B"}, {2, 2}, {0.5, 0.25, 0.0, 0.25});
  const auto res = evaluate(eq, skew);
  EXPECT_EQ(res.verdict, Verdict::kViolated);
  EXPECT_NEAR(res.worst_slack, -(1.0 - h2(0.75)), 1e-12);
  EXPECT_EQ(evaluate(eq, skew, 1.0).verdict, Verdict::kSatisfied);
}

TEST(Evaluate, VariablesMatchedByName) {
  const auto sys = catalog::instrumental_inequality();  // X, Y, Z
  // joint over (Z, X, Y) with X = Z and Y = X
  const JointDistribution d({"Z", "Y", "X"}, {2, 2, 2}, {0.5, 0, 0, 0, 0, 0, 0, 0.5});
  const auto res = evaluate(sys, d);
  EXPECT_NEAR(res.slack[0], 0.0, 1e-12);  // H(X) - I(X:Z) - I(Y:Z|X) = 1 - 1 - 0
  EXPECT_THROW(evaluate(sys, independent_bits({"X", "Y"})), InvalidArgument);
  EXPECT_THROW(evaluate(sys, SetFunction(2)), InvalidArgument);
}

TEST(Evaluate, TermsUseTheirDefinitions) {
  const auto sys = catalog::instrumental_strength_bound();  // C(X->Y) >= I(Y:Z)
  const JointDistribution all_independent = independent_bits({"X", "Y", "Z", "U"});
  EXPECT_NEAR(evaluate(sys, all_independent).slack[0], 0.0, 1e-12);
  EXPECT_THROW(evaluate(sys, independent_bits({"X", "Y", "Z"})), InvalidArgument);
}

TEST(Ancestor, MatchesDefinitionAndPerfectCorrelation) {
  for (int n = 2; n <= 5; ++n)
    for (int m = 2; m <= n; ++m)
      for (int j = 0; j < n; ++j) {
        const auto c = ancestor_inequality(n, m, j);
        const auto h = entropy_vector(perfect(n));
        // (m-1) - (n-1) bits
        EXPECT_NEAR(c.slack(h), static_cast<double>(m - n), 1e-12);
      }
  EXPECT_THROW(ancestor_inequality(3, 4, 0), InvalidArgument);
  EXPECT_THROW(ancestor_inequality(3, 1, 0), InvalidArgument);
  EXPECT_THROW(ancestor_inequality(3, 2, 3), InvalidArgument);
}

TEST(Ancestor, ImpliedByCommonAncestorCone) {
  for (auto [n, m] : {std::pair{3, 2}, std::pair{4, 2}, std::pair{4, 3}}) {
    const Dag dag = catalog::common_ancestor_dag(n, m);
    const auto cone = constrained_cone(dag);
    for (int j = 0; j < n; ++j) {
      const auto c = ancestor_inequality(n, m, j);
      ConstraintSystem target(dag.size(), dag.names());
      target.add(c);
      EXPECT_TRUE(implies(cone, target.inequalities()[0]).implied) << n << " " << m << " " << j;
    }
    // one less H(V1) fails: V1..Vm copies of a common ancestor violate it
    LinearExpr tighter = Rational(m - 2) * H(SubsetIndex{1});
    for (int i = 1; i < n; ++i) tighter -= I(SubsetIndex::singleton(i), SubsetIndex{1});
    const auto res = implies(cone, LinearConstraint::ge(tighter));
    EXPECT_FALSE(res.implied);
    EXPECT_FALSE(res.witness.empty());
  }
}

TEST(Chsh, OrbitAndValidityForJointDistributions) {
  const auto chsh = chsh_inequalities();
  EXPECT_EQ(chsh.inequalities().size(), 4u);
  StreamRng rng(12, StreamFamily::kFuzz, 40);
  for (int t = 0; t < 300; ++t) {
    const auto dist = entrocone::testing::random_distribution(rng, {2, 2, 2, 2}, t % 2 ? 0.5 : 0.0);
    for (const auto& c : chsh.inequalities()) ASSERT_GE(c.slack(entropy_vector(dist)), -1e-12);
  }
  for (const auto& c : chsh.inequalities()) EXPECT_TRUE(implies(elementary_inequalities(4), c).implied);
}

TEST(Classifier, InstrumentalAndDiamond) {
  const Dag ins = catalog::instrumental();
  const auto sc = scenario_observable(ins);
  const auto derived = eliminate(constrained_cone(ins), sc).first;
  const auto nontrivial = nontrivial_inequalities(derived, sc);
  ASSERT_EQ(nontrivial.size(), 1u);
  EXPECT_TRUE(nontrivial[0].same_as(catalog::instrumental_inequality().inequalities()[0]));
  EXPECT_EQ(nontrivial_inequalities(derived, sc, FacetKind::kDagSpecific).size(), 1u);
  EXPECT_EQ(nontrivial_inequalities(derived, sc, FacetKind::kBasic).size(), derived.inequalities().size());

  const Dag dia = catalog::diamond();
  const auto pw = scenario_pairwise(4, {0, 1, 2, 3});
  const auto dd = eliminate(constrained_cone(dia), pw).first;
  const auto seven = nontrivial_inequalities(dd, pw);
  const auto expected = catalog::diamond_pairwise_inequalities();
  ASSERT_EQ(seven.size(), 7u);
  for (const auto& c : expected.inequalities()) EXPECT_TRUE(contains(seven, c)) << c.label();
}

TEST(Classifier, Tiers) {
  const Dag dag = catalog::instrumental();
  const auto sc = scenario_observable(dag);
  const FacetClassifier cls(eliminate(constrained_cone(dag), sc).first, sc);
  const SubsetIndex X{1}, Y{2}, Z{4};
  EXPECT_EQ(cls.classify(LinearConstraint::ge(I(X, Y, Z))), FacetKind::kBasic);
  EXPECT_EQ(cls.classify(LinearConstraint::ge(I(X, Y) + I(X, Z))), FacetKind::kBasic);
  EXPECT_EQ(cls.classify(LinearConstraint::ge(I(X, Z) - I(X, Y, Z) + I(X, Y, Z))), FacetKind::kBasic);
  EXPECT_EQ(cls.classify(catalog::instrumental_inequality().inequalities()[0]), FacetKind::kDagSpecific);
  EXPECT_TRUE(cls.trivial(LinearConstraint::ge(H(X))));
  EXPECT_FALSE(cls.trivial(catalog::instrumental_inequality().inequalities()[0]));
}

TEST(CausalStrength, InstrumentalBound) {
  // Z uniform, X = Z, Y = X: I(Y:Z) = 1 bit
  const JointDistribution copy({"X", "Y", "Z"}, {2, 2, 2}, {0.5, 0, 0, 0, 0, 0, 0, 0.5});
  const auto b = causal_strength_bound(catalog::instrumental(), "X", "Y", copy);
  EXPECT_FALSE(b.vacuous);
  EXPECT_NEAR(b.bound, 1.0, 1e-9);
  ASSERT_FALSE(b.derivation.empty());
  const auto none = causal_strength_bound(catalog::instrumental(), "X", "Y", independent_bits({"X", "Y", "Z"}));
  EXPECT_TRUE(none.vacuous);
  EXPECT_THROW(causal_strength_bound(catalog::instrumental(), "Y", "X", copy), InvalidArgument);
}

// Every lower bound holds on entropy vectors of random compatible models.
TEST(CausalStrength, BoundsAreSound) {
  const Dag dag = catalog::instrumental_with_direct_edge();
  const JointDistribution any = independent_bits({"X", "Y", "Z"});
  const auto b = causal_strength_bound(dag, "Z", "Y", any);
  ASSERT_FALSE(b.lower_bounds.empty());
  const int z = dag.index_of("Z"), y = dag.index_of("Y");
  const LinearExpr term = I(SubsetIndex::singleton(z), SubsetIndex::singleton(y), dag.parents(y).without(z));
  StreamRng rng(3, StreamFamily::kFuzz, 41);
  for (int t = 0; t < 100; ++t) {
    const auto model = entrocone::testing::random_model(rng, dag, {2, 2, 2, 2}, t % 2 ? 0.4 : 0.0);
    const auto h = entropy_vector(model_distribution(model));
    const double c = term.evaluate(h);
    for (const auto& lb : b.lower_bounds) ASSERT_GE(c - lb.evaluate(h), -1e-9) << t;
  }
}
