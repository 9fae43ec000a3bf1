#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "entrocone/dag.hpp"
#include "entrocone/subset.hpp"

namespace entrocone {

/// Default cap on dense probability tables.
inline constexpr std::size_t kMaxTableCells = std::size_t{1} << 24;

/// A function on subsets of [n]; value at the empty set is structurally 0.
template <typename T>
class BasicSetFunction {
 public:
  BasicSetFunction() = default;
  explicit BasicSetFunction(int n) : n_(n), values_(std::size_t{1} << n, T{}) { check_variable_count(n); }

  int n() const { return n_; }
  const T& operator[](SubsetIndex s) const { return values_.at(s.mask); }
  void set(SubsetIndex s, T v) {
    if (s.empty()) return;
    values_.at(s.mask) = std::move(v);
  }

  /// Restriction to the variables in keep, re-indexed in ascending order.
  BasicSetFunction restrict_to(SubsetIndex keep) const {
    const auto idx = keep.members();
    BasicSetFunction out(static_cast<int>(idx.size()));
    for (std::uint32_t m = 1; m < (1u << idx.size()); ++m) {
      SubsetIndex full_s;
      for (std::size_t k = 0; k < idx.size(); ++k)
        if ((m >> k) & 1u) full_s = full_s.with(idx[k]);
      out.set(SubsetIndex{m}, (*this)[full_s]);
    }
    return out;
  }

 private:
  int n_ = 0;
  std::vector<T> values_;
};

using SetFunction = BasicSetFunction<double>;

/// Dense joint probability table, row-major with the last variable fastest.
class JointDistribution {
 public:
  JointDistribution() = default;

  JointDistribution(std::vector<std::string> names, std::vector<int> cards, std::vector<double> probs)
      : names_(std::move(names)), cards_(std::move(cards)), probs_(std::move(probs)) {
    if (cards_.empty()) throw InvalidArgument("distribution needs at least one variable");
    check_variable_count(static_cast<int>(cards_.size()));
    if (names_.size() != cards_.size()) throw InvalidArgument("names and cardinalities differ in length");
    std::size_t cells = 1;
    for (int c : cards_) {
      if (c < 1) throw InvalidArgument("cardinalities must be positive");
      cells *= static_cast<std::size_t>(c);
      if (cells > kMaxTableCells) throw ResourceLimit("probability table exceeds cell cap");
    }
    if (probs_.size() != cells)
      throw InvalidArgument("expected " + std::to_string(cells) + " probabilities, got " +
                            std::to_string(probs_.size()));
    double sum = 0.0;
    for (double p : probs_) {
      if (!(p >= 0.0)) throw InvalidArgument("probabilities must be nonnegative");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw InvalidArgument("probabilities must sum to 1");
  }

  int num_vars() const { return static_cast<int>(cards_.size()); }
  const std::vector<std::string>& names() const { return names_; }
  const std::vector<int>& cardinalities() const { return cards_; }
  const std::vector<double>& probs() const { return probs_; }

  /// Probability of one full assignment.
  double at(const std::vector<int>& x) const { return probs_.at(flat_index(x)); }

  std::size_t flat_index(const std::vector<int>& x) const {
    std::size_t k = 0;
    for (std::size_t i = 0; i < cards_.size(); ++i) k = k * static_cast<std::size_t>(cards_[i]) + static_cast<std::size_t>(x[i]);
    return k;
  }

  /// Summed-out table over the variables in keep (ascending index order).
  std::vector<double> marginal_table(SubsetIndex keep) const {
    const int n = num_vars();
    std::vector<std::size_t> stride(static_cast<std::size_t>(n), 0);
    std::size_t cells = 1;
    for (int i = n - 1; i >= 0; --i)
      if (keep.contains(i)) {
        stride[i] = cells;
        cells *= static_cast<std::size_t>(cards_[i]);
      }
    std::vector<double> out(cells, 0.0);
    std::vector<int> digit(static_cast<std::size_t>(n), 0);
    std::size_t target = 0;
    for (double p : probs_) {
      out[target] += p;
      // odometer increment, last variable fastest
      for (int i = n - 1; i >= 0; --i) {
        target += stride[i];
        if (++digit[i] < cards_[i]) break;
        target -= stride[i] * static_cast<std::size_t>(cards_[i]);
        digit[i] = 0;
      }
    }
    return out;
  }

 private:
  std::vector<std::string> names_;
  std::vector<int> cards_;
  std::vector<double> probs_;
};

/// Shannon entropy in bits of a probability vector; 0 log 0 := 0.
inline double shannon_entropy(const std::vector<double>& p) {
  double h = 0.0;
  for (double v : p)
    if (v > 0.0) h -= v * std::log2(v);
  return h;
}

inline double subset_entropy(const JointDistribution& dist, SubsetIndex s) {
  if (s.empty()) return 0.0;
  return shannon_entropy(dist.marginal_table(s));
}

/// h(S) = H(X_S) in bits for every nonempty S.
inline SetFunction entropy_vector(const JointDistribution& dist) {
  const int n = dist.num_vars();
  SetFunction h(n);
  for (std::uint32_t m = 1; m < (1u << n); ++m) h.set(SubsetIndex{m}, subset_entropy(dist, SubsetIndex{m}));
  return h;
}

/// I(a : b | z) = H(az) + H(bz) - H(abz) - H(z), in bits.
inline double mutual_information(const SetFunction& h, SubsetIndex a, SubsetIndex b, SubsetIndex z = {}) {
  if (!a.disjoint(b) || !a.disjoint(z) || !b.disjoint(z))
    throw InvalidArgument("mutual_information: subsets must be pairwise disjoint");
  return h[a | z] + h[b | z] - h[a | b | z] - h[z];
}

inline double mutual_information(const JointDistribution& dist, SubsetIndex a, SubsetIndex b, SubsetIndex z = {}) {
  if (!a.disjoint(b) || !a.disjoint(z) || !b.disjoint(z))
    throw InvalidArgument("mutual_information: subsets must be pairwise disjoint");
  return subset_entropy(dist, a | z) + subset_entropy(dist, b | z) - subset_entropy(dist, a | b | z) -
         subset_entropy(dist, z);
}

inline JointDistribution marginalize(const JointDistribution& dist, SubsetIndex keep) {
  if (keep.empty()) throw InvalidArgument("marginalize: keep must be nonempty");
  if (!keep.subset_of(SubsetIndex::full(dist.num_vars()))) throw InvalidArgument("marginalize: index out of range");
  std::vector<std::string> names;
  std::vector<int> cards;
  for (int i : keep.members()) {
    names.push_back(dist.names()[i]);
    cards.push_back(dist.cardinalities()[i]);
  }
  auto table = dist.marginal_table(keep);
  return JointDistribution(std::move(names), std::move(cards), std::move(table));
}

/// Exact joint table of a structural model over all of its nodes.
inline JointDistribution model_distribution(const StructuralModel& model,
                                            std::size_t max_cells = kMaxTableCells) {
  const int n = model.size();
  const auto& cards = model.cardinalities();
  std::size_t cells = 1;
  for (int c : cards) {
    cells *= static_cast<std::size_t>(c);
    if (cells > max_cells) throw ResourceLimit("model product space exceeds cell cap");
  }
  std::vector<std::vector<std::vector<double>>> cond(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    for (std::size_t r = 0; r < model.parent_configurations(i); ++r) cond[i].push_back(model.conditional(i, r));

  std::vector<double> probs(cells, 0.0);
  std::vector<int> x(static_cast<std::size_t>(n), 0);
  for (std::size_t k = 0; k < cells; ++k) {
    double p = 1.0;
    for (int i = 0; i < n && p > 0.0; ++i) p *= cond[i][model.parent_row(i, x.data())][static_cast<std::size_t>(x[i])];
    probs[k] = p;
    for (int i = n - 1; i >= 0; --i) {
      if (++x[i] < cards[i]) break;
      x[i] = 0;
    }
  }
  return JointDistribution(model.dag().names(), cards, std::move(probs));
}

}  // namespace entrocone
