#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace entrocone {

/// Raised when an input violates an operation's precondition.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a configured size cap (variable count, table size,
/// intermediate inequality count) would be exceeded.
class ResourceLimit : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Hard cap on the number of variables of a set function (2^n coordinates).
inline constexpr int kMaxVariables = 20;

/// A subset of [n] stored as a bitmask; bit i set means variable i is a member.
struct SubsetIndex {
  std::uint32_t mask = 0;

  constexpr SubsetIndex() = default;
  constexpr explicit SubsetIndex(std::uint32_t m) : mask(m) {}

  static constexpr SubsetIndex singleton(int i) { return SubsetIndex{1u << i}; }
  static constexpr SubsetIndex full(int n) {
    return SubsetIndex{n >= 32 ? ~0u : ((1u << n) - 1u)};
  }

  constexpr bool empty() const { return mask == 0; }
  constexpr int size() const { return std::popcount(mask); }
  constexpr bool contains(int i) const { return (mask >> i) & 1u; }
  constexpr bool subset_of(SubsetIndex o) const { return (mask & ~o.mask) == 0; }
  constexpr bool disjoint(SubsetIndex o) const { return (mask & o.mask) == 0; }

  constexpr SubsetIndex operator|(SubsetIndex o) const { return SubsetIndex{mask | o.mask}; }
  constexpr SubsetIndex operator&(SubsetIndex o) const { return SubsetIndex{mask & o.mask}; }
  constexpr SubsetIndex without(SubsetIndex o) const { return SubsetIndex{mask & ~o.mask}; }
  constexpr SubsetIndex with(int i) const { return SubsetIndex{mask | (1u << i)}; }
  constexpr SubsetIndex without(int i) const { return SubsetIndex{mask & ~(1u << i)}; }

  constexpr auto operator<=>(const SubsetIndex&) const = default;

  std::vector<int> members() const {
    std::vector<int> out;
    for (std::uint32_t m = mask; m != 0; m &= m - 1) out.push_back(std::countr_zero(m));
    return out;
  }
};

inline void check_variable_count(int n) {
  if (n < 1) throw InvalidArgument("variable count must be positive");
  if (n > kMaxVariables)
    throw ResourceLimit("variable count " + std::to_string(n) + " exceeds cap " +
                        std::to_string(kMaxVariables));
}

/// Variable names are identifiers: letters, digits and '_', not starting
/// with a digit.
inline void check_name(const std::string& name) {
  bool ok = !name.empty() && !(name[0] >= '0' && name[0] <= '9');
  for (char c : name)
    ok = ok && ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_');
  if (!ok) throw InvalidArgument("invalid variable name '" + name + "'");
}

/// Orders subsets by cardinality, then lexicographically by sorted members.
/// This is the coordinate order used for canonical output.
inline bool subset_order(SubsetIndex a, SubsetIndex b) {
  if (a.size() != b.size()) return a.size() < b.size();
  const auto ma = a.members();
  const auto mb = b.members();
  return ma < mb;
}

/// Joins member names with ',' in index order: {0,2} -> "X,Z".
inline std::string subset_key(SubsetIndex s, const std::vector<std::string>& names) {
  std::string out;
  for (int i : s.members()) {
    if (!out.empty()) out += ',';
    out += names.at(static_cast<std::size_t>(i));
  }
  return out;
}

/// Concatenated names for compact H(...) rendering: {0,2} -> "XZ", or "X,Z"
/// when some variable name is longer than one character.
inline std::string subset_label(SubsetIndex s, const std::vector<std::string>& names) {
  bool short_names = true;
  for (const auto& nm : names) short_names = short_names && nm.size() == 1;
  if (!short_names) return subset_key(s, names);
  std::string out;
  for (int i : s.members()) out += names.at(static_cast<std::size_t>(i));
  return out;
}

}  // namespace entrocone
