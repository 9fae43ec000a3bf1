#include <gtest/gtest.h>

#include <functional>

#include "entrocone/catalog.hpp"
#include "entrocone/dag.hpp"
#include "entrocone/dist.hpp"
#include "test_util.hpp"

using namespace entrocone;
using entrocone::testing::random_dag;

namespace {

// Independent oracle: enumerate every simple path and apply the blocking
// rules directly.
bool blocked_by_paths(const Dag& dag, int a, int b, SubsetIndex z) {
  const int n = dag.size();
  std::vector<int> path{a};
  std::vector<bool> on(static_cast<std::size_t>(n), false);
  on[a] = true;
  bool open_found = false;
  auto desc_or_self_in_z = [&](int v) { return z.contains(v) || !dag.descendants(v).disjoint(z); };
  auto path_open = [&]() {
    for (std::size_t k = 1; k + 1 < path.size(); ++k) {
      const int prev = path[k - 1], v = path[k], next = path[k + 1];
      const bool collider = dag.has_edge(prev, v) && dag.has_edge(next, v);
      if (collider ? !desc_or_self_in_z(v) : z.contains(v)) return false;
    }
    return true;
  };
  std::function<void(int)> walk = [&](int v) {
    if (open_found) return;
    if (v == b) {
      open_found = path_open();
      return;
    }
    for (int w = 0; w < n; ++w) {
      if (on[w] || !(dag.has_edge(v, w) || dag.has_edge(w, v))) continue;
      on[w] = true;
      path.push_back(w);
      walk(w);
      path.pop_back();
      on[w] = false;
    }
  };
  walk(a);
  return !open_found;
}

}  // namespace

TEST(Dag, RejectsCyclesBadNamesAndUnknownNodes) {
  EXPECT_THROW(Dag::from_edges({{"A", true}, {"B", true}}, {{"A", "B"}, {"B", "A"}}), InvalidArgument);
  EXPECT_THROW(Dag::from_edges({{"A", true}, {"A", true}}, {}), InvalidArgument);
  EXPECT_THROW(Dag::from_edges({{"A", true}}, {{"A", "C"}}), InvalidArgument);
  EXPECT_THROW(Dag::from_edges({{"A b", true}}, {}), InvalidArgument);
  EXPECT_THROW(Dag::from_edges({{"A", true}}, {{"A", "A"}}), InvalidArgument);
  EXPECT_THROW(Dag({}, {}), InvalidArgument);
}

TEST(Dag, TopologicalOrderRespectsEdges) {
  const Dag d = catalog::instrumental();
  std::vector<int> pos(static_cast<std::size_t>(d.size()));
  for (std::size_t k = 0; k < d.topological_order().size(); ++k) pos[d.topological_order()[k]] = static_cast<int>(k);
  for (int c = 0; c < d.size(); ++c)
    for (int p : d.parents(c).members()) EXPECT_LT(pos[p], pos[c]);
}

TEST(DSeparation, InstrumentalStatements) {
  const Dag d = catalog::instrumental();  // X, Y, Z, U
  const auto s = [](int i) { return SubsetIndex::singleton(i); };
  EXPECT_TRUE(d_separated(d, s(2), s(3), {}));
  EXPECT_FALSE(d_separated(d, s(2), s(3), s(0)));       // collider X opened
  EXPECT_TRUE(d_separated(d, s(2), s(1), s(0) | s(3)));  // Z ⊥ Y | X, U
  EXPECT_FALSE(d_separated(d, s(2), s(1), s(0)));
  EXPECT_THROW(d_separated(d, s(0), s(0), {}), InvalidArgument);
}

TEST(DSeparation, MatchesPathEnumerationOnRandomDags) {
  StreamRng rng(2024, StreamFamily::kFuzz, 1);
  int checked = 0;
  for (int trial = 0; trial < 150; ++trial) {
    const int n = 3 + static_cast<int>(rng.below(4));
    const Dag d = random_dag(rng, n, 0.45);
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b) {
        const SubsetIndex rest = SubsetIndex::full(n).without(a).without(b);
        std::uint32_t sub = 0;
        do {
          const SubsetIndex z{sub};
          ASSERT_EQ(d_separated(d, SubsetIndex::singleton(a), SubsetIndex::singleton(b), z),
                    blocked_by_paths(d, a, b, z))
              << "trial " << trial << " a=" << a << " b=" << b << " z=" << z.mask;
          ++checked;
          sub = (sub - rest.mask) & rest.mask;
        } while (sub != 0);
      }
  }
  EXPECT_GT(checked, 1000);
}

TEST(CiConstraints, PairwiseStatementsAreSaturatedStatements) {
  const Dag d = catalog::diamond();
  const auto pairwise = ci_constraints(d, CiMode::kPairwiseSingleton);
  const auto saturated = ci_constraints(d, CiMode::kSaturated);
  EXPECT_FALSE(pairwise.empty());
  for (const auto& ci : pairwise) EXPECT_NE(std::find(saturated.begin(), saturated.end(), ci), saturated.end());
  for (const auto& ci : saturated) EXPECT_TRUE(d_separated(d, ci.a, ci.b, ci.z));
  for (const auto& ci : local_markov_statements(d)) EXPECT_TRUE(d_separated(d, ci.a, ci.b, ci.z));
}

TEST(CiConstraints, SaturatedModeIsCapped) {
  StreamRng rng(3, StreamFamily::kFuzz, 0);
  EXPECT_THROW(ci_constraints(random_dag(rng, 11, 0.2), CiMode::kSaturated), ResourceLimit);
}

TEST(StructuralModel, ValidatesMechanisms) {
  const Dag d = Dag::from_edges({{"A", true}, {"B", true}}, {{"A", "B"}});
  EXPECT_THROW(StructuralModel(d, {2, 2}, {CptMechanism{{{0.5, 0.5}}}, CptMechanism{{{1.0, 0.0}}}}), InvalidArgument);
  EXPECT_THROW(StructuralModel(d, {2, 2}, {CptMechanism{{{0.5, 0.6}}}, CptMechanism{{{1, 0}, {0, 1}}}}),
               InvalidArgument);
  EXPECT_THROW(StructuralModel(d, {2, 2}, {CptMechanism{{{0.5, 0.5}}}, FunctionMechanism{{1.0}, {0, 2}}}),
               InvalidArgument);
  EXPECT_NO_THROW(StructuralModel(d, {2, 2}, {CptMechanism{{{0.5, 0.5}}}, FunctionMechanism{{1.0}, {1, 0}}}));
}

TEST(Sampling, DeterministicAndSplittable) {
  const auto model = catalog::noisy_correlation(0.2);
  const auto whole = sample(model, 100, 9);
  const auto head = sample(model, 40, 9);
  const auto tail = sample(model, 60, 9, 40);
  EXPECT_EQ(whole.values, sample(model, 100, 9).values);
  std::vector<int> joined = head.values;
  joined.insert(joined.end(), tail.values.begin(), tail.values.end());
  EXPECT_EQ(whole.values, joined);
  EXPECT_NE(whole.values, sample(model, 100, 10).values);
}

TEST(Sampling, FrequenciesMatchExactTable) {
  StreamRng rng(11, StreamFamily::kFuzz, 2);
  const Dag d = random_dag(rng, 4, 0.6);
  const auto model = entrocone::testing::random_model(rng, d, {2, 3, 2, 2});
  const auto exact = model_distribution(model);
  const std::size_t count = 200000;
  const auto data = sample(model, count, 5);
  std::vector<double> freq(exact.probs().size(), 0.0);
  for (std::size_t r = 0; r < data.rows(); ++r) {
    std::vector<int> x(data.row(r), data.row(r) + 4);
    freq[exact.flat_index(x)] += 1.0 / count;
  }
  for (std::size_t k = 0; k < freq.size(); ++k) {
    const double p = exact.probs()[k];
    EXPECT_NEAR(freq[k], p, 5 * std::sqrt(p * (1 - p) / count) + 1e-12) << "cell " << k;
  }
}
