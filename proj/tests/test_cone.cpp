#include <gtest/gtest.h>

#include "entrocone/catalog.hpp"
#include "entrocone/cone.hpp"
#include "entrocone/dist.hpp"
#include "test_util.hpp"

using namespace entrocone;
using Vec = std::vector<Rational>;

namespace {

// Dense coefficient vector over coordinates 1..2^n-1 (index mask-1).
Vec dense(const LinearExpr& e, int n) {
  Vec v(static_cast<std::size_t>((1u << n) - 1), Rational(0));
  for (const auto& [c, k] : e.coeffs()) v[c.as_subset().mask - 1] = k;
  return v;
}

Rational dot(const Vec& a, const Vec& b) {
  Rational s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Null space of the rows by Gauss-Jordan elimination over Q.
std::vector<Vec> null_space(std::vector<Vec> rows, std::size_t d) {
  std::vector<int> pivot_col;
  std::size_t r = 0;
  for (std::size_t c = 0; c < d && r < rows.size(); ++c) {
    std::size_t p = r;
    while (p < rows.size() && sgn(rows[p][c]) == 0) ++p;
    if (p == rows.size()) continue;
    std::swap(rows[p], rows[r]);
    const Rational inv = 1 / rows[r][c];
    for (auto& x : rows[r]) x *= inv;
    for (std::size_t q = 0; q < rows.size(); ++q)
      if (q != r && sgn(rows[q][c]) != 0) {
        const Rational f = rows[q][c];
        for (std::size_t k = 0; k < d; ++k) rows[q][k] -= f * rows[r][k];
      }
    pivot_col.push_back(static_cast<int>(c));
    ++r;
  }
  std::vector<Vec> basis;
  for (std::size_t free = 0; free < d; ++free) {
    if (std::find(pivot_col.begin(), pivot_col.end(), static_cast<int>(free)) != pivot_col.end()) continue;
    Vec v(d, Rational(0));
    v[free] = 1;
    for (std::size_t k = 0; k < pivot_col.size(); ++k) v[pivot_col[k]] = -rows[k][free];
    basis.push_back(v);
  }
  return basis;
}

// Oracle: extreme rays of the pointed cone {A h >= 0, E h = 0} by trying
// every subset of tight inequalities.
std::vector<Vec> extreme_rays(const ConstraintSystem& sys) {
  const std::size_t d = (1u << sys.n()) - 1;
  std::vector<Vec> ineq, eq;
  for (const auto& c : sys.inequalities()) ineq.push_back(dense(c.expr(), sys.n()));
  for (const auto& c : sys.equalities()) eq.push_back(dense(c.expr(), sys.n()));
  std::vector<Vec> rays;
  for (std::uint32_t mask = 0; mask < (1u << ineq.size()); ++mask) {
    std::vector<Vec> rows = eq;
    for (std::size_t i = 0; i < ineq.size(); ++i)
      if ((mask >> i) & 1u) rows.push_back(ineq[i]);
    const auto ns = null_space(rows, d);
    if (ns.size() != 1) continue;
    for (int sign : {1, -1}) {
      Vec r = ns[0];
      for (auto& x : r) x *= sign;
      bool ok = true;
      for (const auto& a : ineq) ok = ok && sgn(dot(a, r)) >= 0;
      if (!ok) continue;
      bool dup = false;
      for (const auto& s : rays) {
        // same direction?
        Rational ratio = 0;
        bool same = true;
        for (std::size_t k = 0; k < d && same; ++k) {
          if (sgn(s[k]) == 0 || sgn(r[k]) == 0) {
            same = sgn(s[k]) == 0 && sgn(r[k]) == 0;
            continue;
          }
          if (sgn(ratio) == 0) ratio = r[k] / s[k];
          same = r[k] == ratio * s[k] && sgn(ratio) > 0;
        }
        dup = dup || same;
      }
      if (!dup) rays.push_back(r);
    }
  }
  return rays;
}

bool implied_by_rays(const std::vector<Vec>& rays, const LinearConstraint& c, int n) {
  const Vec v = dense(c.expr(), n);
  for (const auto& r : rays)
    if (sgn(dot(v, r)) < 0) return false;
  return true;
}

// Checks an implication answer against its own certificate.
void verify_certificate(const ConstraintSystem& sys, const LinearConstraint& cand, const ImplicationResult& res) {
  if (res.implied) {
    LinearExpr combo;
    ASSERT_EQ(res.multipliers.size(), sys.inequalities().size());
    for (std::size_t i = 0; i < res.multipliers.size(); ++i) {
      ASSERT_GE(sgn(res.multipliers[i]), 0);
      combo += res.multipliers[i] * sys.inequalities()[i].expr();
    }
    // the residual must vanish on the equality subspace and leave a
    // nonnegative constant
    const LinearExpr residual = cand.expr() - combo;
    std::vector<Vec> eq;
    for (const auto& c : sys.equalities()) eq.push_back(dense(c.expr(), sys.n()));
    const Vec r = dense(residual, sys.n());
    for (const auto& x : null_space(eq, r.size())) ASSERT_EQ(sgn(dot(r, x)), 0);
    ASSERT_GE(sgn(residual.constant()), 0);
    return;
  }
  auto value = [&](const LinearExpr& e) {
    Rational s = res.witness_is_ray ? Rational(0) : e.constant();
    for (const auto& [c, k] : e.coeffs()) {
      auto it = res.witness.find(c);
      if (it != res.witness.end()) s += k * it->second;
    }
    return s;
  };
  for (const auto& c : sys.inequalities()) ASSERT_GE(sgn(value(c.expr())), 0);
  for (const auto& c : sys.equalities()) ASSERT_EQ(sgn(value(c.expr())), 0);
  ASSERT_LT(sgn(value(cand.expr())), 0);
}

}  // namespace

TEST(ElementaryInequalities, CountFormula) {
  EXPECT_EQ(num_elementary_inequalities(1), 1u);
  EXPECT_EQ(num_elementary_inequalities(2), 3u);
  EXPECT_EQ(num_elementary_inequalities(3), 9u);
  EXPECT_EQ(num_elementary_inequalities(4), 28u);
  for (int n = 1; n <= 7; ++n) EXPECT_EQ(elementary_inequalities(n).inequalities().size(), num_elementary_inequalities(n));
}

// Every elementary inequality holds on 1000 random entropy vectors.
TEST(ElementaryInequalities, FuzzOnRandomDistributions) {
  StreamRng rng(31337, StreamFamily::kFuzz, 10);
  int evaluated = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(4));
    std::vector<int> cards;
    for (int i = 0; i < n; ++i) cards.push_back(2 + static_cast<int>(rng.below(2)));
    const auto dist = entrocone::testing::random_distribution(rng, cards, trial % 3 == 0 ? 0.6 : 0.0);
    const SetFunction h = entropy_vector(dist);
    const auto gamma = elementary_inequalities(n);
    for (const auto& c : gamma.inequalities()) {
      ASSERT_GE(c.slack(h), -1e-12) << "trial " << trial << ": " << c.label();
      ++evaluated;
    }
  }
  EXPECT_GT(evaluated, 10000);
}

TEST(Implies, ShannonConsequencesAndNonConsequences) {
  const auto g3 = elementary_inequalities(3, {"X", "Y", "Z"});
  const SubsetIndex X{1}, Y{2}, Z{4};
  EXPECT_TRUE(implies(g3, LinearConstraint::ge(I(X, Y | Z))).implied);
  EXPECT_TRUE(implies(g3, LinearConstraint::ge(H(X | Y | Z) - H(X))).implied);
  EXPECT_TRUE(implies(g3, LinearConstraint::ge(Hc(X, Y))).implied);
  EXPECT_FALSE(implies(g3, LinearConstraint::ge(I(X, Y) - I(X, Y, Z))).implied);
  EXPECT_FALSE(implies(g3, LinearConstraint::eq(I(X, Y))).implied);
  // affine: h >= 0 does not give h >= 1, but gives h >= -1
  EXPECT_FALSE(implies(g3, LinearConstraint::ge(H(X) - Rational(1))).implied);
  EXPECT_TRUE(implies(g3, LinearConstraint::ge(H(X) + Rational(1))).implied);
}

TEST(Implies, ZhangYeungIsNotShannon) {
  const auto g4 = elementary_inequalities(4, {"A", "B", "C", "D"});
  const SubsetIndex A{1}, B{2}, C{4}, D{8};
  // 2I(C:D) <= I(A:B) + I(A:CD) + 3I(C:D|A) + I(C:D|B)
  const LinearExpr lhs = I(A, B) + I(A, C | D) + Rational(3) * I(C, D, A) + I(C, D, B) - Rational(2) * I(C, D);
  const auto res = implies(g4, LinearConstraint::ge(lhs));
  EXPECT_FALSE(res.implied);
  verify_certificate(g4, LinearConstraint::ge(lhs), res);
}

TEST(Implies, MatchesExtremeRayOracle) {
  const auto g3 = elementary_inequalities(3);
  const auto rays = extreme_rays(g3);
  EXPECT_EQ(rays.size(), 8u);
  StreamRng rng(99, StreamFamily::kFuzz, 11);
  int implied = 0;
  for (int trial = 0; trial < 300; ++trial) {
    LinearExpr e;
    for (std::uint32_t m = 1; m < 8; ++m) e.add(Coord::subset(SubsetIndex{m}), Rational(static_cast<int>(rng.below(5)) - 1));
    const auto c = LinearConstraint::ge(e);
    const auto res = implies(g3, c);
    ASSERT_EQ(res.implied, implied_by_rays(rays, c, 3)) << trial;
    verify_certificate(g3, c, res);
    implied += res.implied;
  }
  EXPECT_GT(implied, 10);
  EXPECT_LT(implied, 290);
}

TEST(Implies, MatchesRayOracleWithIndependenceEqualities) {
  // X -> Y <- Z: X ⊥ Z
  const Dag collider = Dag::from_edges({{"X", true}, {"Y", true}, {"Z", true}}, {{"X", "Y"}, {"Z", "Y"}});
  const auto cone = constrained_cone(collider);
  ASSERT_EQ(cone.equalities().size(), 1u);
  const auto rays = extreme_rays(cone);
  StreamRng rng(7, StreamFamily::kFuzz, 12);
  for (int trial = 0; trial < 200; ++trial) {
    LinearExpr e;
    for (std::uint32_t m = 1; m < 8; ++m) e.add(Coord::subset(SubsetIndex{m}), Rational(static_cast<int>(rng.below(5)) - 2));
    const auto c = LinearConstraint::ge(e);
    const auto res = implies(cone, c);
    ASSERT_EQ(res.implied, implied_by_rays(rays, c, 3)) << trial;
    verify_certificate(cone, c, res);
  }
}

TEST(ConstrainedCone, InstrumentalIndependences) {
  const auto cone = constrained_cone(catalog::instrumental());  // X, Y, Z, U
  const SubsetIndex Y{2}, Z{4}, U{8}, X{1};
  EXPECT_TRUE(implies(cone, LinearConstraint::eq(I(Z, U))).implied);
  EXPECT_TRUE(implies(cone, LinearConstraint::eq(I(Z, Y, X | U))).implied);
  EXPECT_FALSE(implies(cone, LinearConstraint::eq(I(Z, Y))).implied);
  const auto saturated = constrained_cone(catalog::instrumental(), CiMode::kSaturated);
  for (const auto& c : saturated.equalities()) EXPECT_TRUE(implies(cone, c).implied) << c.label();
}

TEST(Cone, FeasibilityAndEpsilon) {
  auto sys = elementary_inequalities(2, {"X", "Y"});
  EXPECT_TRUE(feasible(sys));
  sys.add(LinearConstraint::ge(LinearExpr(Rational(-1)) - H(SubsetIndex{1})));
  EXPECT_FALSE(feasible(sys));
  const auto eps = add_epsilon_constraint(elementary_inequalities(2, {"X", "Y"}),
                                          CiStatement{SubsetIndex{1}, SubsetIndex{2}, {}}, Rational(1, 100));
  EXPECT_TRUE(implies(eps, LinearConstraint::ge(LinearExpr(Rational(1, 50)) - I(SubsetIndex{1}, SubsetIndex{2}))).implied);
  EXPECT_FALSE(implies(eps, LinearConstraint::ge(LinearExpr(Rational(1, 200)) - I(SubsetIndex{1}, SubsetIndex{2}))).implied);
  EXPECT_THROW(add_epsilon_constraint(eps, CiStatement{SubsetIndex{1}, SubsetIndex{2}, {}}, Rational(-1)),
               InvalidArgument);
}

TEST(Cone, BasicInequalitiesOnPowerSetEqualShannon) {
  std::vector<SubsetIndex> all;
  for (std::uint32_t m = 1; m < 16; ++m) all.push_back(SubsetIndex{m});
  const auto basic = basic_inequalities_on(all, 4, {"A", "B", "C", "D"});
  const auto g4 = elementary_inequalities(4, {"A", "B", "C", "D"});
  for (const auto& c : g4.inequalities()) EXPECT_TRUE(implies(basic, c).implied);
  for (const auto& c : basic.inequalities()) EXPECT_TRUE(implies(g4, c).implied);
  const auto sub = elementary_inequalities_on(SubsetIndex{0b1010}, 4, {"A", "B", "C", "D"});
  EXPECT_EQ(sub.inequalities().size(), 3u);
  for (const auto& c : sub.inequalities())
    for (const auto& [k, v] : c.expr().coeffs()) EXPECT_TRUE(k.as_subset().subset_of(SubsetIndex{0b1010}));
}
