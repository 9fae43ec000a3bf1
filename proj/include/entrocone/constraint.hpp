#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "entrocone/dist.hpp"
#include "entrocone/subset.hpp"

namespace entrocone {

using Integer = mpz_class;
using Rational = mpq_class;

/// Nearest double for rationals with numerator and denominator below 2^53
/// (get_d() truncates); larger values fall back to truncation.
inline double to_double(const Rational& q) {
  if (mpz_sizeinbase(q.get_num_mpz_t(), 2) <= 53 && mpz_sizeinbase(q.get_den_mpz_t(), 2) <= 53)
    return q.get_num().get_d() / q.get_den().get_d();
  return q.get_d();
}

/// A coordinate of the entropy space: either the joint entropy of a
/// nonempty subset, or an auxiliary term introduced for projection.
struct Coord {
  static constexpr std::uint32_t kAuxBit = 1u << 31;
  std::uint32_t key = 0;

  static constexpr Coord subset(SubsetIndex s) { return Coord{s.mask}; }
  static constexpr Coord aux(int id) { return Coord{kAuxBit | static_cast<std::uint32_t>(id)}; }

  constexpr bool is_aux() const { return (key & kAuxBit) != 0; }
  constexpr SubsetIndex as_subset() const { return SubsetIndex{key}; }
  constexpr int aux_id() const { return static_cast<int>(key & ~kAuxBit); }

  constexpr bool operator==(const Coord&) const = default;
};

/// Canonical coordinate order: subsets by size then members, auxiliary
/// terms last in id order.
struct CoordLess {
  bool operator()(Coord a, Coord b) const {
    if (a.is_aux() != b.is_aux()) return b.is_aux();
    if (a.is_aux()) return a.aux_id() < b.aux_id();
    return subset_order(a.as_subset(), b.as_subset());
  }
};

/// Sparse affine expression Σ c_k x_k + constant with rational coefficients.
class LinearExpr {
 public:
  LinearExpr() = default;
  explicit LinearExpr(Rational constant) : constant_(std::move(constant)) {}

  static LinearExpr term(Coord c, Rational k = 1) {
    LinearExpr e;
    e.add(c, std::move(k));
    return e;
  }

  void add(Coord c, const Rational& k) {
    if (!c.is_aux() && c.as_subset().empty()) return;  // h(∅) = 0
    auto it = coeffs_.find(c);
    if (it == coeffs_.end()) {
      if (sgn(k) != 0) coeffs_.emplace(c, k);
      return;
    }
    it->second += k;
    if (sgn(it->second) == 0) coeffs_.erase(it);
  }

  const std::map<Coord, Rational, CoordLess>& coeffs() const { return coeffs_; }
  const Rational& constant() const { return constant_; }
  void set_constant(Rational c) { constant_ = std::move(c); }

  Rational coeff(Coord c) const {
    auto it = coeffs_.find(c);
    return it == coeffs_.end() ? Rational(0) : it->second;
  }

  bool is_constant() const { return coeffs_.empty(); }

  LinearExpr& operator+=(const LinearExpr& o) {
    for (const auto& [c, k] : o.coeffs_) add(c, k);
    constant_ += o.constant_;
    return *this;
  }
  LinearExpr& operator-=(const LinearExpr& o) {
    for (const auto& [c, k] : o.coeffs_) add(c, -k);
    constant_ -= o.constant_;
    return *this;
  }
  LinearExpr& operator*=(const Rational& s) {
    if (sgn(s) == 0) {
      coeffs_.clear();
      constant_ = 0;
      return *this;
    }
    for (auto& [c, k] : coeffs_) k *= s;
    constant_ *= s;
    return *this;
  }

  friend LinearExpr operator+(LinearExpr a, const LinearExpr& b) { return a += b; }
  friend LinearExpr operator-(LinearExpr a, const LinearExpr& b) { return a -= b; }
  friend LinearExpr operator*(const Rational& s, LinearExpr a) { return a *= s; }
  friend LinearExpr operator-(LinearExpr a) { return a *= Rational(-1); }
  friend LinearExpr operator+(LinearExpr a, const Rational& c) {
    a.constant_ += c;
    return a;
  }
  friend LinearExpr operator-(LinearExpr a, const Rational& c) {
    a.constant_ -= c;
    return a;
  }

  /// Value on a set function; auxiliary coordinates are read from aux.
  double evaluate(const SetFunction& h, const std::vector<double>& aux = {}) const {
    double v = to_double(constant_);
    for (const auto& [c, k] : coeffs_) {
      const double x = c.is_aux() ? aux.at(static_cast<std::size_t>(c.aux_id())) : h[c.as_subset()];
      v += to_double(k) * x;
    }
    return v;
  }

  bool operator==(const LinearExpr& o) const { return constant_ == o.constant_ && coeffs_ == o.coeffs_; }

 private:
  std::map<Coord, Rational, CoordLess> coeffs_;
  Rational constant_{0};
};

/// H(S) as an expression.
inline LinearExpr H(SubsetIndex s) { return LinearExpr::term(Coord::subset(s)); }

/// I(a : b | z) = H(az) + H(bz) - H(abz) - H(z).
inline LinearExpr I(SubsetIndex a, SubsetIndex b, SubsetIndex z = {}) {
  return H(a | z) + H(b | z) - H(a | b | z) - H(z);
}

/// H(a | z) = H(az) - H(z).
inline LinearExpr Hc(SubsetIndex a, SubsetIndex z) { return H(a | z) - H(z); }

enum class ConstraintKind { kInequality, kEquality };

/// An affine constraint `expr >= 0` or `expr == 0` with a provenance label.
class LinearConstraint {
 public:
  LinearConstraint() = default;
  LinearConstraint(LinearExpr expr, ConstraintKind kind, std::string label = {})
      : expr_(std::move(expr)), kind_(kind), label_(std::move(label)) {}

  static LinearConstraint ge(LinearExpr e, std::string label = {}) {
    return {std::move(e), ConstraintKind::kInequality, std::move(label)};
  }
  /// lhs <= 0, stored as -lhs >= 0.
  static LinearConstraint le(LinearExpr e, std::string label = {}) {
    return {-std::move(e), ConstraintKind::kInequality, std::move(label)};
  }
  static LinearConstraint eq(LinearExpr e, std::string label = {}) {
    return {std::move(e), ConstraintKind::kEquality, std::move(label)};
  }

  const LinearExpr& expr() const { return expr_; }
  ConstraintKind kind() const { return kind_; }
  bool is_equality() const { return kind_ == ConstraintKind::kEquality; }
  const std::string& label() const { return label_; }
  void set_label(std::string l) { label_ = std::move(l); }

  /// Integer coefficients with gcd 1 (constant included); equalities have
  /// their first nonzero coefficient (coordinate order) positive.
  LinearConstraint canonical() const {
    Integer den_lcm = 1;
    auto fold_den = [&](const Rational& q) { mpz_lcm(den_lcm.get_mpz_t(), den_lcm.get_mpz_t(), q.get_den_mpz_t()); };
    for (const auto& [c, k] : expr_.coeffs()) fold_den(k);
    fold_den(expr_.constant());
    Integer g = 0;
    auto fold_num = [&](const Rational& q) {
      const Integer v = q.get_num() * (den_lcm / q.get_den());
      mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), v.get_mpz_t());
    };
    for (const auto& [c, k] : expr_.coeffs()) fold_num(k);
    fold_num(expr_.constant());
    LinearConstraint out = *this;
    if (g == 0) return out;
    Rational scale(den_lcm, g);
    scale.canonicalize();
    if (kind_ == ConstraintKind::kEquality) {
      const Rational& lead = expr_.coeffs().empty() ? expr_.constant() : expr_.coeffs().begin()->second;
      if (sgn(lead) < 0) scale = -scale;
    }
    out.expr_ *= scale;
    return out;
  }

  /// Comparison key of the canonical form (label ignored).
  bool same_as(const LinearConstraint& o) const {
    const auto a = canonical();
    const auto b = o.canonical();
    return a.kind_ == b.kind_ && a.expr_ == b.expr_;
  }

  double slack(const SetFunction& h, const std::vector<double>& aux = {}) const { return expr_.evaluate(h, aux); }

  bool mentions_aux() const {
    for (const auto& [c, k] : expr_.coeffs())
      if (c.is_aux()) return true;
    return false;
  }

 private:
  LinearExpr expr_;
  ConstraintKind kind_ = ConstraintKind::kInequality;
  std::string label_;
};

/// Lexicographic order on canonical constraints by coefficient vector in
/// coordinate order, then constant; inequalities before equalities.
inline bool constraint_order(const LinearConstraint& a, const LinearConstraint& b) {
  if (a.kind() != b.kind()) return a.kind() == ConstraintKind::kInequality;
  // merge the two sparse maps in coordinate order
  const auto& ca = a.expr().coeffs();
  const auto& cb = b.expr().coeffs();
  auto ia = ca.begin();
  auto ib = cb.begin();
  CoordLess less;
  while (ia != ca.end() || ib != cb.end()) {
    Rational va = 0;
    Rational vb = 0;
    if (ib == cb.end() || (ia != ca.end() && less(ia->first, ib->first))) {
      va = ia->second;
      ++ia;
    } else if (ia == ca.end() || less(ib->first, ia->first)) {
      vb = ib->second;
      ++ib;
    } else {
      va = ia->second;
      vb = ib->second;
      ++ia;
      ++ib;
    }
    if (va != vb) return va > vb;
  }
  return a.expr().constant() < b.expr().constant();
}

/// Definition of an auxiliary coordinate: term == definition.
struct AuxTerm {
  std::string name;
  LinearExpr definition;
};

/// Inequalities and equalities over the coordinates of n named variables
/// plus optional auxiliary terms. Constraints are stored canonically and
/// without duplicates.
class ConstraintSystem {
 public:
  ConstraintSystem() = default;
  ConstraintSystem(int n, std::vector<std::string> names) : n_(n), names_(std::move(names)) {
    check_variable_count(n);
    if (static_cast<int>(names_.size()) != n) throw InvalidArgument("system needs one name per variable");
    std::set<std::string> seen;
    for (const auto& nm : names_) {
      check_name(nm);
      if (!seen.insert(nm).second) throw InvalidArgument("duplicate variable name: " + nm);
    }
  }

  int n() const { return n_; }
  const std::vector<std::string>& names() const { return names_; }
  const std::vector<AuxTerm>& aux_terms() const { return aux_; }
  const std::vector<LinearConstraint>& inequalities() const { return ineqs_; }
  const std::vector<LinearConstraint>& equalities() const { return eqs_; }
  std::size_t size() const { return ineqs_.size() + eqs_.size(); }

  int add_aux(AuxTerm t) {
    aux_.push_back(std::move(t));
    return static_cast<int>(aux_.size()) - 1;
  }
  void set_aux_terms(std::vector<AuxTerm> t) { aux_ = std::move(t); }

  /// Adds the canonical form; returns false if an identical constraint exists.
  bool add(const LinearConstraint& c) {
    check_coordinates(c.expr());
    LinearConstraint k = c.canonical();
    auto& list = k.is_equality() ? eqs_ : ineqs_;
    for (const auto& existing : list)
      if (existing.expr() == k.expr()) return false;
    list.push_back(std::move(k));
    return true;
  }

  void add_all(const std::vector<LinearConstraint>& cs) {
    for (const auto& c : cs) add(c);
  }

  /// Sorts both lists by constraint_order.
  void sort() {
    std::stable_sort(ineqs_.begin(), ineqs_.end(), constraint_order);
    std::stable_sort(eqs_.begin(), eqs_.end(), constraint_order);
  }

  /// Every coordinate mentioned by some constraint, in canonical order.
  std::vector<Coord> mentioned_coordinates() const {
    std::set<Coord, CoordLess> s;
    for (const auto* list : {&ineqs_, &eqs_})
      for (const auto& c : *list)
        for (const auto& [k, v] : c.expr().coeffs()) s.insert(k);
    return {s.begin(), s.end()};
  }

  /// All coordinates of the space: every nonempty subset plus aux terms.
  std::vector<Coord> all_coordinates() const {
    std::vector<Coord> out;
    for (std::uint32_t m = 1; m < (1u << n_); ++m) out.push_back(Coord::subset(SubsetIndex{m}));
    std::sort(out.begin(), out.end(), CoordLess{});
    for (int i = 0; i < static_cast<int>(aux_.size()); ++i) out.push_back(Coord::aux(i));
    return out;
  }

  std::string coord_name(Coord c) const {
    if (c.is_aux()) return aux_.at(static_cast<std::size_t>(c.aux_id())).name;
    return subset_label(c.as_subset(), names_);
  }

 private:
  void check_coordinates(const LinearExpr& e) const {
    const SubsetIndex all = SubsetIndex::full(n_);
    for (const auto& [c, k] : e.coeffs()) {
      if (c.is_aux()) {
        if (c.aux_id() >= static_cast<int>(aux_.size())) throw InvalidArgument("unknown auxiliary coordinate");
      } else if (!c.as_subset().subset_of(all)) {
        throw InvalidArgument("coordinate outside the variable set");
      }
    }
  }

  int n_ = 0;
  std::vector<std::string> names_;
  std::vector<AuxTerm> aux_;
  std::vector<LinearConstraint> ineqs_;
  std::vector<LinearConstraint> eqs_;
};

// ---------------------------------------------------------------------------
// Rendering

namespace detail {

inline std::string rational_str(const Rational& q) {
  std::ostringstream os;
  os << q;
  return os.str();
}

struct NamedTerm {
  std::string text;
  LinearExpr expr;
};

/// Candidate information terms over the variables in `vars`: I(a:b|Z) for
/// singletons a < b and H(S) for every nonempty S.
inline std::vector<NamedTerm> information_terms(SubsetIndex vars, const std::vector<std::string>& names) {
  std::vector<NamedTerm> terms;
  const auto mem = vars.members();
  for (std::size_t x = 0; x < mem.size(); ++x)
    for (std::size_t y = x + 1; y < mem.size(); ++y) {
      const SubsetIndex rest = vars.without(mem[x]).without(mem[y]);
      std::uint32_t sub = 0;
      do {
        const SubsetIndex z{sub};
        std::string t = "I(" + names[mem[x]] + ":" + names[mem[y]];
        if (!z.empty()) t += "|" + subset_label(z, names);
        t += ")";
        terms.push_back({t, I(SubsetIndex::singleton(mem[x]), SubsetIndex::singleton(mem[y]), z)});
        sub = (sub - rest.mask) & rest.mask;
      } while (sub != 0);
    }
  std::uint32_t sub = vars.mask;
  while (sub != 0) {
    terms.push_back({"H(" + subset_label(SubsetIndex{sub}, names) + ")", H(SubsetIndex{sub})});
    sub = (sub - 1) & vars.mask;
  }
  return terms;
}

inline bool decompose(const LinearExpr& residual, const std::vector<NamedTerm>& terms, int depth,
                      std::vector<std::pair<int, std::size_t>>& out) {
  if (residual.coeffs().empty()) return true;
  if (depth == 0) return false;
  // an I-term clears at most four coordinates
  Rational l1 = 0;
  for (const auto& [c, k] : residual.coeffs()) l1 += abs(k);
  if (l1 > 4 * depth) return false;
  const auto& [pivot, pk] = *residual.coeffs().rbegin();
  for (std::size_t t = 0; t < terms.size(); ++t) {
    const Rational tk = terms[t].expr.coeff(pivot);
    if (sgn(tk) == 0) continue;
    const int sign = sgn(tk) == sgn(pk) ? 1 : -1;
    out.emplace_back(sign, t);
    if (decompose(residual - Rational(sign) * terms[t].expr, terms, depth - 1, out)) return true;
    out.pop_back();
  }
  return false;
}

}  // namespace detail

/// Renders an expression as a sum of H(S) terms: "H(X) + H(Y) - H(XY)".
inline std::string render_entropy_form(const LinearExpr& e, const ConstraintSystem& sys) {
  std::string out;
  for (const auto& [c, k] : e.coeffs()) {
    const bool neg = sgn(k) < 0;
    const Rational mag = abs(k);
    if (out.empty())
      out += neg ? "-" : "";
    else
      out += neg ? " - " : " + ";
    if (mag != 1) out += detail::rational_str(mag) + "*";
    out += c.is_aux() ? sys.coord_name(c) : "H(" + sys.coord_name(c) + ")";
  }
  if (sgn(e.constant()) != 0 || out.empty()) {
    const bool neg = sgn(e.constant()) < 0;
    if (out.empty())
      out += detail::rational_str(e.constant());
    else
      out += (neg ? " - " : " + ") + detail::rational_str(abs(e.constant()));
  }
  return out;
}

/// Renders in information notation when a short decomposition into
/// I(a:b|Z) and H(S) terms with unit multiplicities exists (at most five
/// variables and five terms), otherwise falls back to entropy form.
inline std::string render_information_form(const LinearExpr& e, const ConstraintSystem& sys) {
  LinearExpr subset_part;
  LinearExpr rest(e.constant());
  SubsetIndex vars;
  for (const auto& [c, k] : e.coeffs()) {
    if (c.is_aux()) {
      rest.add(c, k);
    } else {
      subset_part.add(c, k);
      vars = vars | c.as_subset();
    }
  }
  std::string body;
  if (!subset_part.coeffs().empty() && vars.size() <= 5) {
    // only terms whose joint entropies stay inside the mentioned subsets
    std::vector<SubsetIndex> mentioned;
    for (const auto& [c, k] : subset_part.coeffs()) mentioned.push_back(c.as_subset());
    std::vector<detail::NamedTerm> terms;
    for (auto& t : detail::information_terms(vars, sys.names())) {
      bool inside = true;
      for (const auto& [c, k] : t.expr.coeffs()) {
        bool covered = false;
        for (auto m : mentioned) covered = covered || c.as_subset().subset_of(m);
        inside = inside && covered;
      }
      if (inside) terms.push_back(std::move(t));
    }
    std::vector<std::pair<int, std::size_t>> picked;
    for (int depth = 1; depth <= 5; ++depth) {
      picked.clear();
      if (detail::decompose(subset_part, terms, depth, picked)) break;
      picked.clear();
    }
    if (!picked.empty()) {
      // positive terms first, then by term text
      std::stable_sort(picked.begin(), picked.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
      for (const auto& [sign, t] : picked) {
        if (body.empty())
          body += sign < 0 ? "-" : "";
        else
          body += sign < 0 ? " - " : " + ";
        body += terms[t].text;
      }
    }
  }
  if (body.empty() && !subset_part.coeffs().empty()) body = render_entropy_form(subset_part, sys);
  if (!rest.coeffs().empty() || sgn(rest.constant()) != 0 || body.empty()) {
    std::string tail = render_entropy_form(rest, sys);
    if (body.empty()) return tail;
    if (!tail.empty() && tail[0] == '-')
      body += " - " + tail.substr(1);
    else
      body += " + " + tail;
  }
  return body;
}

/// "expr >= 0" / "expr = 0" rendering.
inline std::string render(const LinearConstraint& c, const ConstraintSystem& sys, bool information_form = true) {
  const std::string body =
      information_form ? render_information_form(c.expr(), sys) : render_entropy_form(c.expr(), sys);
  return body + (c.is_equality() ? " = 0" : " >= 0");
}

}  // namespace entrocone
