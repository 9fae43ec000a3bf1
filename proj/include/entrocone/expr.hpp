#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "entrocone/constraint.hpp"

namespace entrocone {

/// Exact value of a decimal or fraction literal: "3", "-0.125", "2/3",
/// "1e-3".
inline Rational parse_rational(std::string_view text) {
  std::string s(text);
  auto fail = [&]() -> Rational { throw InvalidArgument("not a number: '" + s + "'"); };
  if (s.empty()) return fail();
  if (auto slash = s.find('/'); slash != std::string::npos) {
    const Rational num = parse_rational(s.substr(0, slash));
    const Rational den = parse_rational(s.substr(slash + 1));
    if (sgn(den) == 0) throw InvalidArgument("zero denominator in '" + s + "'");
    return num / den;
  }
  std::size_t pos = 0;
  bool negative = false;
  if (s[pos] == '+' || s[pos] == '-') negative = s[pos++] == '-';
  Integer mantissa = 0;
  int scale = 0;
  bool digits = false, dot = false;
  for (; pos < s.size(); ++pos) {
    const char c = s[pos];
    if (c >= '0' && c <= '9') {
      mantissa = mantissa * 10 + (c - '0');
      digits = true;
      if (dot) ++scale;
    } else if (c == '.' && !dot) {
      dot = true;
    } else {
      break;
    }
  }
  if (!digits) return fail();
  long exponent = 0;
  if (pos < s.size()) {
    if (s[pos] != 'e' && s[pos] != 'E') return fail();
    try {
      std::size_t used = 0;
      exponent = std::stol(s.substr(pos + 1), &used);
      if (used != s.size() - pos - 1) return fail();
    } catch (const std::logic_error&) {
      return fail();
    }
    if (exponent > 1000 || exponent < -1000) return fail();
  }
  exponent -= scale;
  Integer ten_pow;
  mpz_ui_pow_ui(ten_pow.get_mpz_t(), 10, static_cast<unsigned long>(exponent < 0 ? -exponent : exponent));
  Rational out = exponent < 0 ? Rational(mantissa, ten_pow) : Rational(mantissa * ten_pow);
  out.canonicalize();
  return negative ? Rational(-out) : out;
}

namespace detail {

class ExprParser {
 public:
  ExprParser(std::string_view text, const ConstraintSystem& sys) : s_(text), sys_(sys) {}

  LinearExpr expression() {
    LinearExpr e;
    skip();
    bool first = true;
    for (;;) {
      skip();
      int sign = 1;
      if (peek('+')) {
        ++pos_;
      } else if (peek('-')) {
        ++pos_;
        sign = -1;
      } else if (!first) {
        break;
      }
      first = false;
      skip();
      e += Rational(sign) * term();
      skip();
      if (!peek('+') && !peek('-')) break;
    }
    return e;
  }

  std::string_view rest() const { return s_.substr(pos_); }
  bool done() {
    skip();
    return pos_ == s_.size();
  }
  bool consume(std::string_view tok) {
    skip();
    if (s_.substr(pos_, tok.size()) == tok) {
      pos_ += tok.size();
      return true;
    }
    return false;
  }
  [[noreturn]] void error(const std::string& what) const {
    throw InvalidArgument(what + " at position " + std::to_string(pos_) + " in '" + std::string(s_) + "'");
  }

 private:
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool peek(char c) const { return pos_ < s_.size() && s_[pos_] == c; }

  LinearExpr term() {
    Rational k = 1;
    bool have_number = false;
    if (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.' ||
                                  s_[pos_] == '/' || s_[pos_] == 'e' || s_[pos_] == 'E' ||
                                  ((s_[pos_] == '-' || s_[pos_] == '+') && pos_ > start &&
                                   (s_[pos_ - 1] == 'e' || s_[pos_ - 1] == 'E'))))
        ++pos_;
      k = parse_rational(s_.substr(start, pos_ - start));
      have_number = true;
      skip();
      if (peek('*')) {
        ++pos_;
        skip();
      } else if (pos_ == s_.size() || peek('+') || peek('-') || peek('>') || peek('<') || peek('=')) {
        return LinearExpr(k);
      }
    }
    (void)have_number;
    return k * atom();
  }

  LinearExpr atom() {
    for (int a = 0; a < static_cast<int>(sys_.aux_terms().size()); ++a) {
      const std::string& nm = sys_.aux_terms()[a].name;
      if (s_.substr(pos_, nm.size()) == nm) {
        pos_ += nm.size();
        return LinearExpr::term(Coord::aux(a));
      }
    }
    if (consume("H(")) {
      const SubsetIndex a = names();
      SubsetIndex z;
      if (consume("|")) z = names();
      if (!consume(")")) error("expected ')'");
      return Hc(a, z);
    }
    if (consume("I(")) {
      const SubsetIndex a = names();
      if (!consume(":")) error("expected ':'");
      const SubsetIndex b = names();
      SubsetIndex z;
      if (consume("|")) z = names();
      if (!consume(")")) error("expected ')'");
      return I(a, b, z);
    }
    error("expected H(...), I(...) or a term name");
  }

  /// Comma-separated names; with one-character names, "XY" also works.
  SubsetIndex names() {
    SubsetIndex out;
    bool single = true;
    for (const auto& nm : sys_.names()) single = single && nm.size() == 1;
    for (;;) {
      skip();
      const std::size_t start = pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
      const std::string_view word = s_.substr(start, pos_ - start);
      if (word.empty()) error("expected a variable name");
      auto index = [&](std::string_view nm) {
        for (int i = 0; i < sys_.n(); ++i)
          if (sys_.names()[i] == nm) return i;
        return -1;
      };
      if (int i = index(word); i >= 0) {
        out = out.with(i);
      } else if (single) {
        for (char c : word) {
          const int j = index(std::string_view(&c, 1));
          if (j < 0) error("unknown variable '" + std::string(1, c) + "'");
          out = out.with(j);
        }
      } else {
        error("unknown variable '" + std::string(word) + "'");
      }
      skip();
      if (!peek(',')) break;
      ++pos_;
    }
    return out;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  const ConstraintSystem& sys_;
};

}  // namespace detail

/// Parses a linear combination of H(A|B), I(A:B|C), named auxiliary terms
/// and constants over the system's variables, e.g. "2*H(X) - I(Y:Z|X)".
inline LinearExpr parse_expression(std::string_view text, const ConstraintSystem& sys) {
  detail::ExprParser p(text, sys);
  LinearExpr e = p.expression();
  if (!p.done()) p.error("unexpected input");
  return e;
}

/// Parses "lhs >= rhs", "lhs <= rhs" or "lhs = rhs".
inline LinearConstraint parse_constraint(std::string_view text, const ConstraintSystem& sys) {
  detail::ExprParser p(text, sys);
  const LinearExpr lhs = p.expression();
  ConstraintKind kind = ConstraintKind::kInequality;
  bool flip = false;
  if (p.consume(">=")) {
  } else if (p.consume("<=")) {
    flip = true;
  } else if (p.consume("=")) {
    kind = ConstraintKind::kEquality;
  } else {
    p.error("expected >=, <= or =");
  }
  const LinearExpr rhs = p.expression();
  if (!p.done()) p.error("unexpected input");
  return LinearConstraint(flip ? rhs - lhs : lhs - rhs, kind, std::string(text));
}

}  // namespace entrocone
