#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <type_traits>
#include <unordered_map>
#include <utility>
#include <vector>

#include "entrocone/cone.hpp"
#include "entrocone/constraint.hpp"
#include "entrocone/lp.hpp"
#include "entrocone/parallel.hpp"

namespace entrocone {

/// The downward-closed family of jointly observable subsets. Auxiliary
/// coordinates of a system are always kept.
struct MarginalScenario {
  int n = 0;
  std::vector<SubsetIndex> kept;  // canonical order
  bool auto_closed = false;       // true if the input had to be closed

  bool contains(SubsetIndex s) const { return std::binary_search(kept.begin(), kept.end(), s, subset_order); }

  bool downward_closed() const {
    for (auto s : kept)
      for (int i : s.members())
        if (s.size() > 1 && !contains(s.without(i))) return false;
    return true;
  }
};

/// Builds a scenario from arbitrary subsets, adding every nonempty subset
/// of each given set. `auto_closed` records whether anything was added.
inline MarginalScenario make_scenario(int n, const std::vector<SubsetIndex>& subsets) {
  std::set<std::uint32_t> given;
  std::set<std::uint32_t> closed;
  const SubsetIndex all = SubsetIndex::full(n);
  for (auto s : subsets) {
    if (s.empty()) continue;
    if (!s.subset_of(all)) throw InvalidArgument("scenario subset outside the variable set");
    given.insert(s.mask);
    for (std::uint32_t sub = s.mask; sub != 0; sub = (sub - 1) & s.mask) closed.insert(sub);
  }
  MarginalScenario sc;
  sc.n = n;
  for (auto m : closed) sc.kept.push_back(SubsetIndex{m});
  std::sort(sc.kept.begin(), sc.kept.end(), subset_order);
  sc.auto_closed = closed.size() != given.size();
  return sc;
}

/// All nonempty subsets of the observable nodes.
inline MarginalScenario scenario_observable(const Dag& dag) {
  const SubsetIndex obs = dag.observables();
  if (obs.empty()) throw InvalidArgument("DAG has no observable nodes");
  return make_scenario(dag.size(), {obs});
}

/// Singletons and pairs of the given variables.
inline MarginalScenario scenario_pairwise(int n, const std::vector<int>& vars) {
  if (vars.size() < 2) throw InvalidArgument("pairwise scenario needs at least two variables");
  std::vector<SubsetIndex> subs;
  for (std::size_t a = 0; a < vars.size(); ++a)
    for (std::size_t b = a + 1; b < vars.size(); ++b)
      subs.push_back(SubsetIndex::singleton(vars[a]).with(vars[b]));
  return make_scenario(n, subs);
}

/// Scenario with some subsets removed (their own subsets stay).
inline MarginalScenario scenario_without(const MarginalScenario& sc, const std::vector<SubsetIndex>& drop) {
  MarginalScenario out = sc;
  out.kept.erase(std::remove_if(out.kept.begin(), out.kept.end(),
                                [&](SubsetIndex s) { return std::find(drop.begin(), drop.end(), s) != drop.end(); }),
                 out.kept.end());
  out.auto_closed = false;
  if (!out.downward_closed()) throw InvalidArgument("removing these subsets breaks downward closure");
  return out;
}

struct EliminationConfig {
  /// Intermediate inequality cap (resource-limit error beyond it).
  std::size_t max_inequalities = 200000;
  /// Run an exact LP redundancy pass after any step that leaves more rows
  /// than this. Zero disables mid-elimination LP pruning.
  std::size_t lp_prune_threshold = 400;
  /// Solve equalities for eliminated coordinates before FM.
  bool substitute_equalities = true;
  /// Discard combinations with Imbert's history-size criterion.
  bool imbert = true;
  /// Remove redundant input inequalities (after substitution) before FM.
  bool prune_input = false;
  /// Explicit elimination order; coordinates not listed follow greedily.
  std::vector<Coord> order;
  int threads = 1;
};

struct EliminationStep {
  Coord coord;
  std::size_t before = 0;
  std::size_t generated = 0;  // rows after combination, before any pruning
  std::size_t after = 0;      // rows after dedup, Imbert and LP pruning
  bool lp_pruned = false;
  double seconds = 0.0;
};

struct EliminationReport {
  std::vector<Coord> order;
  std::size_t substituted_equalities = 0;
  std::size_t input_inequalities = 0;
  std::vector<EliminationStep> steps;
  std::size_t final_before_pruning = 0;
  std::size_t output_inequalities = 0;
  std::size_t output_equalities = 0;
  bool big_integers = false;
  double total_seconds = 0.0;
};

namespace detail {

struct Overflow {};

/// Integer traits for the FM core: checked int64 or GMP integers.
template <typename Int>
struct IntOps;

template <>
struct IntOps<std::int64_t> {
  static int sign(std::int64_t v) { return (v > 0) - (v < 0); }
  static std::int64_t abs(std::int64_t v) {
    if (v == INT64_MIN) throw Overflow{};
    return v < 0 ? -v : v;
  }
  /// x*a + y*b
  static std::int64_t combine(std::int64_t x, std::int64_t a, std::int64_t y, std::int64_t b) {
    std::int64_t p, q, r;
    if (__builtin_mul_overflow(x, a, &p) || __builtin_mul_overflow(y, b, &q) || __builtin_add_overflow(p, q, &r))
      throw Overflow{};
    return r;
  }
  static std::int64_t gcd(std::int64_t a, std::int64_t b) { return std::gcd(a, b); }
  static std::int64_t from(const Integer& z) {
    if (!z.fits_slong_p()) throw Overflow{};
    return z.get_si();
  }
  static Integer to_integer(std::int64_t v) { return Integer(static_cast<long>(v)); }
  static std::size_t hash(std::int64_t v) { return std::hash<std::int64_t>{}(v); }
};

template <>
struct IntOps<Integer> {
  static int sign(const Integer& v) { return sgn(v); }
  static Integer abs(const Integer& v) { return ::abs(v); }
  static Integer combine(const Integer& x, const Integer& a, const Integer& y, const Integer& b) { return x * a + y * b; }
  static Integer gcd(const Integer& a, const Integer& b) {
    Integer g;
    mpz_gcd(g.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return g;
  }
  static Integer from(const Integer& z) { return z; }
  static Integer to_integer(const Integer& v) { return v; }
  static std::size_t hash(const Integer& v) { return std::hash<long>{}(v.get_si()) ^ v.get_mpz_t()->_mp_size; }
};

/// Fixed-width dynamic bitset for history and support sets.
class Bits {
 public:
  Bits() = default;
  explicit Bits(std::size_t bits) : words_((bits + 63) / 64, 0) {}
  void set(std::size_t i) { words_[i / 64] |= std::uint64_t{1} << (i % 64); }
  bool test(std::size_t i) const { return (words_[i / 64] >> (i % 64)) & 1u; }
  std::size_t count() const {
    std::size_t c = 0;
    for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }
  Bits operator|(const Bits& o) const {
    Bits r = *this;
    for (std::size_t k = 0; k < words_.size(); ++k) r.words_[k] |= o.words_[k];
    return r;
  }
  /// |this \ minus1 \ minus2|
  std::size_t count_without(const Bits& minus1, const Bits& minus2) const {
    std::size_t c = 0;
    for (std::size_t k = 0; k < words_.size(); ++k)
      c += static_cast<std::size_t>(std::popcount(words_[k] & ~minus1.words_[k] & ~minus2.words_[k]));
    return c;
  }

 private:
  std::vector<std::uint64_t> words_;
};

/// Integer row a·x + a[last] ≥ 0 (or = 0) over the working columns.
template <typename Int>
struct Row {
  std::vector<Int> a;
  Bits history;
  Bits support_union;  // union of the supports of the history rows
};

template <typename Int>
void normalize(std::vector<Int>& a) {
  using Ops = IntOps<Int>;
  Int g = 0;
  for (const auto& v : a)
    if (Ops::sign(v) != 0) g = Ops::gcd(g, Ops::abs(v));
  if (Ops::sign(g) == 0 || g == Int(1)) return;
  for (auto& v : a) v /= g;
}

template <typename Int>
Bits support(const std::vector<Int>& a) {
  Bits b(a.size());
  for (std::size_t j = 0; j + 1 < a.size(); ++j)
    if (IntOps<Int>::sign(a[j]) != 0) b.set(j);
  return b;
}

template <typename Int>
struct VecHash {
  std::size_t operator()(const std::vector<Int>& v) const {
    std::size_t h = v.size();
    for (std::size_t j = 0; j + 1 < v.size(); ++j) h = h * 1000003u ^ IntOps<Int>::hash(v[j]);
    return h;
  }
};

template <typename Int>
struct CoeffEq {
  bool operator()(const std::vector<Int>& x, const std::vector<Int>& y) const {
    return std::equal(x.begin(), x.end() - 1, y.begin(), y.end() - 1);
  }
};

template <typename Int>
bool lex_less(const std::vector<Int>& x, const std::vector<Int>& y) {
  return std::lexicographical_compare(x.begin(), x.end(), y.begin(), y.end());
}

/// LP oracle over integer rows: is row `i` implied by the active rows and
/// the equalities? Columns are the working columns plus the constant.
template <typename Int>
class RedundancyOracle {
 public:
  RedundancyOracle(int ncols, const std::vector<std::vector<Int>>& rows, const std::vector<std::vector<Int>>& eqs)
      : dim_(ncols + 1), nrows_(static_cast<int>(rows.size())) {
    for (const auto& r : rows) pool_.push_back(to_column(r, 1));
    for (const auto& e : eqs) {
      pool_.push_back(to_column(e, 1));
      pool_.push_back(to_column(e, -1));
    }
    pool_.push_back({{dim_ - 1, Rational(1)}});
  }

  /// True iff `target` (a row, not necessarily in the pool) is implied by
  /// the pool rows flagged in `active` plus equalities and 1 ≥ 0. `hint`
  /// lists rows likely to be needed; it affects speed only. When implied
  /// and `used` is given, it receives the rows with nonzero multipliers.
  bool implied(const std::vector<Int>& target, const std::vector<char>& active, int skip = -1,
               const std::vector<int>& hint = {}, std::vector<int>* used = nullptr) const {
    std::vector<int> allowed;
    for (int j = 0; j < nrows_; ++j)
      if (active[j] && j != skip) allowed.push_back(j);
    std::vector<int> seed;
    for (int j = nrows_; j < static_cast<int>(pool_.size()); ++j) {
      allowed.push_back(j);
      seed.push_back(j);
    }
    for (int j : hint)
      if (j != skip && active[j]) seed.push_back(j);
    std::vector<Rational> rhs(static_cast<std::size_t>(dim_));
    for (int r = 0; r < dim_; ++r) rhs[r] = Rational(IntOps<Int>::to_integer(target[r]));
    const auto res = lp::solve_farkas_generated(dim_, pool_, allowed, rhs, seed);
    if (res.feasible && used) {
      used->clear();
      for (std::size_t k = 0; k < allowed.size(); ++k)
        if (allowed[k] < nrows_ && sgn(res.multipliers[k]) != 0) used->push_back(allowed[k]);
    }
    return res.feasible;
  }

 private:
  lp::SparseColumn to_column(const std::vector<Int>& r, int sign) const {
    lp::SparseColumn c;
    for (int k = 0; k < dim_; ++k)
      if (IntOps<Int>::sign(r[k]) != 0) c.emplace_back(k, Rational(IntOps<Int>::to_integer(r[k])) * sign);
    return c;
  }

  int dim_;
  int nrows_;
  std::vector<lp::SparseColumn> pool_;
};

/// Removes redundant rows one at a time, in reverse order. With several
/// workers, blocks of rows are tested concurrently against the state at
/// the start of the block; a verdict is kept only if it is also what the
/// sequential pass would decide (not implied by a superset, or implied by
/// rows that are still active), otherwise the row is retested. The result
/// is therefore independent of the thread count.
template <typename Int>
std::vector<char> irredundant_mask(int ncols, const std::vector<std::vector<Int>>& rows,
                                   const std::vector<std::vector<Int>>& eqs, int threads) {
  const RedundancyOracle<Int> oracle(ncols, rows, eqs);
  std::vector<char> active(rows.size(), 1);
  std::vector<int> confirmed;
  const std::size_t workers = static_cast<std::size_t>(std::max(threads, 1));
  std::size_t k = rows.size();
  while (k > 0) {
    const std::size_t block = std::min(k, workers);
    std::vector<char> verdict(block, 0);
    std::vector<std::vector<int>> used(block);
    if (block > 1) {
      parallel_for(block, static_cast<int>(block), [&](std::size_t b) {
        const int row = static_cast<int>(k - 1 - b);
        verdict[b] = oracle.implied(rows[row], active, row, confirmed, &used[b]) ? 1 : 0;
      });
    }
    for (std::size_t b = 0; b < block; ++b) {
      const int row = static_cast<int>(k - 1 - b);
      bool implied = verdict[b] != 0;
      bool exact = block > 1 && (!implied || std::all_of(used[b].begin(), used[b].end(),
                                                         [&](int j) { return active[j] != 0; }));
      if (!exact) implied = oracle.implied(rows[row], active, row, confirmed);
      if (implied)
        active[row] = 0;
      else
        confirmed.push_back(row);
    }
    k -= block;
  }
  return active;
}

template <typename Int>
class FourierMotzkin {
  using Ops = IntOps<Int>;

 public:
  FourierMotzkin(std::vector<bool> eliminate, const EliminationConfig& cfg, EliminationReport& report)
      : elim_(std::move(eliminate)), cfg_(cfg), report_(report), ncols_(static_cast<int>(elim_.size())) {}

  /// rows: inequalities, eqs: equalities over kept columns only.
  std::vector<std::vector<Int>> run(std::vector<std::vector<Int>> ineqs, const std::vector<std::vector<Int>>& kept_eqs,
                                    const std::vector<int>& preferred_order) {
    eqs_ = kept_eqs;
    rows_.clear();
    reset_histories(std::move(ineqs));
    std::vector<bool> done(static_cast<std::size_t>(ncols_), false);
    std::size_t pref = 0;
    for (;;) {
      int col = -1;
      while (pref < preferred_order.size() && done[preferred_order[pref]]) ++pref;
      if (pref < preferred_order.size()) {
        col = preferred_order[pref];
      } else {
        col = pick_column(done);
      }
      if (col < 0) break;
      done[col] = true;
      step(col);
    }
    std::vector<std::vector<Int>> out;
    for (auto& r : rows_) out.push_back(std::move(r.a));
    return out;
  }

  std::vector<int> order() const { return order_; }

 private:
  void reset_histories(std::vector<std::vector<Int>> rows) {
    rows_.clear();
    const std::size_t m = rows.size();
    for (std::size_t i = 0; i < m; ++i) {
      Row<Int> r;
      r.history = Bits(m);
      r.history.set(i);
      r.support_union = support(rows[i]);
      r.a = std::move(rows[i]);
      rows_.push_back(std::move(r));
    }
    explicit_ = Bits(static_cast<std::size_t>(ncols_) + 1);
    explicit_count_ = 0;
  }

  int pick_column(const std::vector<bool>& done) const {
    int best = -1;
    std::size_t best_cost = 0;
    for (int c = 0; c < ncols_; ++c) {
      if (!elim_[c] || done[c]) continue;
      std::size_t pos = 0, neg = 0;
      for (const auto& r : rows_) {
        const int s = Ops::sign(r.a[c]);
        pos += s > 0;
        neg += s < 0;
      }
      const std::size_t cost = pos * neg;
      if (best < 0 || cost < best_cost) {
        best = c;
        best_cost = cost;
      }
    }
    return best;
  }

  void step(int col) {
    const auto t0 = std::chrono::steady_clock::now();
    EliminationStep info;
    info.before = rows_.size();
    order_.push_back(col);

    std::vector<const Row<Int>*> pos, neg;
    std::vector<Row<Int>> next;
    for (auto& r : rows_) {
      const int s = Ops::sign(r.a[col]);
      if (s > 0)
        pos.push_back(&r);
      else if (s < 0)
        neg.push_back(&r);
    }
    explicit_.set(static_cast<std::size_t>(col));
    ++explicit_count_;

    for (auto& r : rows_)
      if (Ops::sign(r.a[col]) == 0) next.push_back(r);

    const Bits empty_bits(static_cast<std::size_t>(ncols_) + 1);
    for (const auto* p : pos)
      for (const auto* q : neg) {
        Bits hist = p->history | q->history;
        const std::size_t hsize = hist.count();
        std::vector<Int> a(p->a.size());
        const Int fp = Ops::abs(q->a[col]);
        const Int fq = p->a[col];
        for (std::size_t j = 0; j < a.size(); ++j) a[j] = Ops::combine(fp, p->a[j], fq, q->a[j]);
        a[col] = 0;
        Bits supp_union = p->support_union | q->support_union;
        if (cfg_.imbert && hsize > 1 + explicit_count_) {
          // effectively eliminated: explicit ones plus columns of the
          // history that vanished from this combination
          const Bits supp = support(a);
          const std::size_t implicit = supp_union.count_without(explicit_, supp);
          if (hsize > 1 + explicit_count_ + implicit) continue;
        }
        normalize(a);
        next.push_back(Row<Int>{std::move(a), std::move(hist), std::move(supp_union)});
        if (next.size() > cfg_.max_inequalities * 4)
          throw ResourceLimit("Fourier-Motzkin step exceeded the intermediate inequality cap");
      }
    info.generated = next.size();
    rows_ = dedup(std::move(next));
    if (rows_.size() > cfg_.max_inequalities)
      throw ResourceLimit("intermediate inequality count " + std::to_string(rows_.size()) + " exceeds cap " +
                          std::to_string(cfg_.max_inequalities));
    if (cfg_.lp_prune_threshold > 0 && rows_.size() > cfg_.lp_prune_threshold) {
      lp_prune();
      info.lp_pruned = true;
    }
    info.after = rows_.size();
    info.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report_.steps.push_back(info);
  }

  /// Drops trivial rows, merges rows with equal coefficients (keeping the
  /// smallest constant, then the smallest history), and sorts.
  std::vector<Row<Int>> dedup(std::vector<Row<Int>> rows) const {
    std::unordered_map<std::vector<Int>, std::size_t, VecHash<Int>, CoeffEq<Int>> seen;
    std::vector<Row<Int>> out;
    bool infeasible = false;
    for (auto& r : rows) {
      bool zero = true;
      for (std::size_t j = 0; j + 1 < r.a.size() && zero; ++j) zero = Ops::sign(r.a[j]) == 0;
      if (zero) {
        if (Ops::sign(r.a.back()) < 0) infeasible = true;
        continue;
      }
      auto it = seen.find(r.a);
      if (it == seen.end()) {
        seen.emplace(r.a, out.size());
        out.push_back(std::move(r));
        continue;
      }
      Row<Int>& kept = out[it->second];
      if (r.a.back() < kept.a.back() ||
          (r.a.back() == kept.a.back() && r.history.count() < kept.history.count()))
        kept = std::move(r);
    }
    if (infeasible) {
      Row<Int> bad;
      bad.a.assign(static_cast<std::size_t>(ncols_) + 1, Int(0));
      bad.a.back() = Int(-1);
      bad.history = Bits(1);
      bad.support_union = Bits(static_cast<std::size_t>(ncols_) + 1);
      out.assign(1, std::move(bad));
    }
    std::sort(out.begin(), out.end(), [](const Row<Int>& x, const Row<Int>& y) { return lex_less(x.a, y.a); });
    return out;
  }

  void lp_prune() {
    std::vector<std::vector<Int>> plain;
    for (const auto& r : rows_) plain.push_back(r.a);
    const auto keep = irredundant_mask<Int>(ncols_, plain, eqs_, cfg_.threads);
    std::vector<std::vector<Int>> kept;
    for (std::size_t i = 0; i < plain.size(); ++i)
      if (keep[i]) kept.push_back(std::move(plain[i]));
    reset_histories(std::move(kept));
  }

  std::vector<bool> elim_;
  const EliminationConfig& cfg_;
  EliminationReport& report_;
  int ncols_;
  std::vector<Row<Int>> rows_;
  std::vector<std::vector<Int>> eqs_;
  Bits explicit_;
  std::size_t explicit_count_ = 0;
  std::vector<int> order_;
};

/// Gaussian reduction of integer rows by an equality on a pivot column:
/// returns |e_p|·row − sign(e_p)·row_p·e, which zeroes the pivot column
/// and keeps the sense of an inequality.
inline std::vector<Integer> reduce_by(const std::vector<Integer>& row, const std::vector<Integer>& eq, int pivot) {
  if (sgn(row[pivot]) == 0) return row;
  const Integer ep = abs(eq[pivot]);
  const Integer f = sgn(eq[pivot]) > 0 ? Integer(row[pivot]) : Integer(-row[pivot]);
  std::vector<Integer> out(row.size());
  for (std::size_t j = 0; j < row.size(); ++j) out[j] = ep * row[j] - f * eq[j];
  normalize(out);
  return out;
}

inline bool is_zero_row(const std::vector<Integer>& r) {
  for (const auto& v : r)
    if (sgn(v) != 0) return false;
  return true;
}

}  // namespace detail

/// Projects the feasible set of `system` onto the scenario's coordinates
/// (plus all auxiliary coordinates). The result is irredundant: every
/// inequality is certified by an exact LP to be a facet, implicit
/// equalities are made explicit, and inequalities are reduced modulo the
/// equalities, so the output is canonical and independent of elimination
/// order.
inline std::pair<ConstraintSystem, EliminationReport> eliminate(const ConstraintSystem& system,
                                                                const MarginalScenario& scenario,
                                                                const EliminationConfig& cfg = {}) {
  using detail::is_zero_row;
  using detail::reduce_by;
  const auto t_start = std::chrono::steady_clock::now();
  if (scenario.n != system.n()) throw InvalidArgument("scenario and system have different variable counts");

  EliminationReport report;

  // working columns: every coordinate mentioned, canonical order
  std::vector<Coord> cols = system.mentioned_coordinates();
  const int ncols = static_cast<int>(cols.size());
  std::unordered_map<std::uint32_t, int> col_of;
  for (int j = 0; j < ncols; ++j) col_of.emplace(cols[j].key, j);
  std::vector<bool> elim(static_cast<std::size_t>(ncols));
  for (int j = 0; j < ncols; ++j) elim[j] = !cols[j].is_aux() && !scenario.contains(cols[j].as_subset());

  auto to_row = [&](const LinearConstraint& c) {
    const LinearConstraint k = c.canonical();
    std::vector<Integer> r(static_cast<std::size_t>(ncols) + 1, Integer(0));
    for (const auto& [coord, v] : k.expr().coeffs()) r[col_of.at(coord.key)] = v.get_num();
    r.back() = k.expr().constant().get_num();
    return r;
  };
  std::vector<std::vector<Integer>> ineqs, eqs;
  for (const auto& c : system.inequalities()) ineqs.push_back(to_row(c));
  for (const auto& c : system.equalities()) eqs.push_back(to_row(c));
  report.input_inequalities = ineqs.size();

  // 1. equality substitution on eliminated columns
  std::vector<std::vector<Integer>> kept_eqs;
  std::vector<std::vector<Integer>> pending = eqs;
  std::vector<bool> solved(static_cast<std::size_t>(ncols), false);
  if (cfg.substitute_equalities) {
    while (!pending.empty()) {
      std::vector<Integer> e = std::move(pending.back());
      pending.pop_back();
      if (is_zero_row(e)) continue;
      int pivot = -1;
      std::size_t best_occ = 0;
      for (int j = 0; j < ncols; ++j) {
        if (!elim[j] || sgn(e[j]) == 0) continue;
        std::size_t occ = 0;
        for (const auto& r : ineqs) occ += sgn(r[j]) != 0;
        // prefer unit coefficients, then fewest occurrences
        const bool unit = abs(e[j]) == 1;
        const bool best_unit = pivot >= 0 && abs(e[pivot]) == 1;
        if (pivot < 0 || (unit && !best_unit) || (unit == best_unit && occ < best_occ)) {
          pivot = j;
          best_occ = occ;
        }
      }
      if (pivot < 0) {
        kept_eqs.push_back(std::move(e));
        continue;
      }
      for (auto& r : ineqs) r = reduce_by(r, e, pivot);
      for (auto& r : pending) r = reduce_by(r, e, pivot);
      for (auto& r : kept_eqs) r = reduce_by(r, e, pivot);
      solved[pivot] = true;
      ++report.substituted_equalities;
    }
  } else {
    // an equality is a pair of opposite inequalities
    for (auto& e : eqs) {
      bool only_kept = true;
      for (int j = 0; j < ncols; ++j) only_kept = only_kept && (elim[j] ? sgn(e[j]) == 0 : true);
      if (only_kept) {
        kept_eqs.push_back(e);
        continue;
      }
      ineqs.push_back(e);
      std::vector<Integer> neg(e.size());
      for (std::size_t j = 0; j < e.size(); ++j) neg[j] = -e[j];
      ineqs.push_back(std::move(neg));
    }
  }
  // drop trivial and duplicate rows left by substitution
  {
    std::vector<std::vector<Integer>> clean;
    std::set<std::vector<Integer>> seen;
    bool infeasible = false;
    for (auto& r : ineqs) {
      bool zero = true;
      for (int j = 0; j < ncols && zero; ++j) zero = sgn(r[j]) == 0;
      if (zero) {
        infeasible = infeasible || sgn(r.back()) < 0;
        continue;
      }
      if (seen.insert(r).second) clean.push_back(std::move(r));
    }
    if (infeasible) {
      std::vector<Integer> bad(static_cast<std::size_t>(ncols) + 1, Integer(0));
      bad.back() = -1;
      clean.assign(1, bad);
    }
    ineqs = std::move(clean);
  }
  if (cfg.prune_input) {
    const auto keep = detail::irredundant_mask<Integer>(ncols, ineqs, kept_eqs, cfg.threads);
    std::vector<std::vector<Integer>> kept;
    for (std::size_t i = 0; i < ineqs.size(); ++i)
      if (keep[i]) kept.push_back(ineqs[i]);
    ineqs = std::move(kept);
  }

  // 2. Fourier-Motzkin on the remaining eliminated columns
  std::vector<bool> fm_elim(static_cast<std::size_t>(ncols));
  for (int j = 0; j < ncols; ++j) fm_elim[j] = elim[j] && !solved[j];
  std::vector<int> preferred;
  for (const Coord& c : cfg.order) {
    auto it = col_of.find(c.key);
    if (it != col_of.end() && fm_elim[it->second]) preferred.push_back(it->second);
  }

  std::vector<std::vector<Integer>> projected;
  std::vector<int> fm_order;
  try {
    std::vector<std::vector<std::int64_t>> small, small_eqs;
    for (const auto& r : ineqs) {
      std::vector<std::int64_t> s;
      for (const auto& v : r) s.push_back(detail::IntOps<std::int64_t>::from(v));
      small.push_back(std::move(s));
    }
    for (const auto& r : kept_eqs) {
      std::vector<std::int64_t> s;
      for (const auto& v : r) s.push_back(detail::IntOps<std::int64_t>::from(v));
      small_eqs.push_back(std::move(s));
    }
    EliminationReport attempt;
    detail::FourierMotzkin<std::int64_t> fm(fm_elim, cfg, attempt);
    auto rows = fm.run(std::move(small), small_eqs, preferred);
    for (const auto& r : rows) {
      std::vector<Integer> z;
      for (auto v : r) z.emplace_back(static_cast<long>(v));
      projected.push_back(std::move(z));
    }
    fm_order = fm.order();
    report.steps = std::move(attempt.steps);
  } catch (const detail::Overflow&) {
    report.big_integers = true;
    EliminationReport attempt;
    detail::FourierMotzkin<Integer> fm(fm_elim, cfg, attempt);
    projected = fm.run(ineqs, kept_eqs, preferred);
    fm_order = fm.order();
    report.steps = std::move(attempt.steps);
  }
  for (int j : fm_order) report.order.push_back(cols[j]);
  for (std::size_t i = 0; i < report.steps.size() && i < report.order.size(); ++i)
    report.steps[i].coord = report.order[i];
  report.final_before_pruning = projected.size();

  // 3. final pass on kept columns: irredundancy, implicit equalities,
  // reduction modulo equalities; repeated until stable
  std::vector<std::vector<Integer>> out_eqs = kept_eqs;
  std::vector<std::vector<Integer>> out_ineqs = projected;
  bool infeasible = false;
  for (const auto& r : out_ineqs) {
    bool zero = true;
    for (int j = 0; j < ncols && zero; ++j) zero = sgn(r[j]) == 0;
    infeasible = infeasible || (zero && sgn(r.back()) < 0);
  }
  auto canonical_eqs = [&](std::vector<std::vector<Integer>> in) {
    // reduced row echelon form with pivots on the last column of each row
    std::vector<std::vector<Integer>> done;
    std::vector<int> pivots;
    for (auto e : in) {
      for (std::size_t k = 0; k < done.size(); ++k) e = reduce_by(e, done[k], pivots[k]);
      if (is_zero_row(e)) continue;
      int p = -1;
      for (int j = ncols - 1; j >= 0; --j)
        if (sgn(e[j]) != 0) {
          p = j;
          break;
        }
      if (p < 0) {
        // 0 = c with c != 0
        infeasible = true;
        continue;
      }
      if (sgn(e[p]) < 0)
        for (auto& v : e) v = -v;
      detail::normalize(e);
      for (std::size_t k = 0; k < done.size(); ++k) {
        done[k] = reduce_by(done[k], e, p);
        if (sgn(done[k][pivots[k]]) < 0)
          for (auto& v : done[k]) v = -v;
        detail::normalize(done[k]);
      }
      done.push_back(std::move(e));
      pivots.push_back(p);
    }
    return std::make_pair(done, pivots);
  };

  if (!infeasible) {
    for (;;) {
      auto [eq_rows, pivots] = canonical_eqs(out_eqs);
      if (infeasible) break;
      std::set<std::vector<Integer>> uniq;
      for (auto r : out_ineqs) {
        for (std::size_t k = 0; k < eq_rows.size(); ++k) r = reduce_by(r, eq_rows[k], pivots[k]);
        bool zero = true;
        for (int j = 0; j < ncols && zero; ++j) zero = sgn(r[j]) == 0;
        if (zero) {
          if (sgn(r.back()) < 0) infeasible = true;
          continue;
        }
        uniq.insert(std::move(r));
      }
      if (infeasible) break;
      std::vector<std::vector<Integer>> rows(uniq.begin(), uniq.end());
      const auto keep = detail::irredundant_mask<Integer>(ncols, rows, eq_rows, cfg.threads);
      std::vector<std::vector<Integer>> facets;
      for (std::size_t i = 0; i < rows.size(); ++i)
        if (keep[i]) facets.push_back(rows[i]);
      // implicit equalities: rows whose negation is implied
      const detail::RedundancyOracle<Integer> oracle(ncols, facets, eq_rows);
      std::vector<char> all(facets.size(), 1);
      std::vector<std::vector<Integer>> new_eqs;
      std::vector<std::vector<Integer>> remaining;
      for (const auto& r : facets) {
        std::vector<Integer> neg(r.size());
        for (std::size_t j = 0; j < r.size(); ++j) neg[j] = -r[j];
        if (oracle.implied(neg, all))
          new_eqs.push_back(r);
        else
          remaining.push_back(r);
      }
      out_eqs = eq_rows;
      if (new_eqs.empty()) {
        out_ineqs = std::move(facets);
        break;
      }
      for (auto& e : new_eqs) out_eqs.push_back(std::move(e));
      out_ineqs = std::move(remaining);
    }
  }

  ConstraintSystem out(system.n(), system.names());
  out.set_aux_terms(system.aux_terms());
  auto to_constraint = [&](const std::vector<Integer>& r, ConstraintKind kind) {
    LinearExpr e(Rational(r.back()));
    for (int j = 0; j < ncols; ++j)
      if (sgn(r[j]) != 0) e.add(cols[j], Rational(r[j]));
    return LinearConstraint(std::move(e), kind);
  };
  if (infeasible) {
    out.add(LinearConstraint::ge(LinearExpr(Rational(-1)), "infeasible"));
  } else {
    for (const auto& r : out_ineqs) out.add(to_constraint(r, ConstraintKind::kInequality));
    for (const auto& r : out_eqs) out.add(to_constraint(r, ConstraintKind::kEquality));
  }
  out.sort();
  report.output_inequalities = out.inequalities().size();
  report.output_equalities = out.equalities().size();
  report.total_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return {std::move(out), std::move(report)};
}

/// Adds an auxiliary coordinate `name` defined by `term == extra`, keeps it
/// in the scenario, and projects. Output inequalities bound the term by
/// observable entropies.
inline ConstraintSystem eliminate_with_term(ConstraintSystem system, const MarginalScenario& scenario,
                                            const LinearExpr& extra, const std::string& name = "t",
                                            const EliminationConfig& cfg = {},
                                            EliminationReport* report = nullptr) {
  for (const auto& [c, k] : extra.coeffs())
    if (!c.is_aux() && !c.as_subset().subset_of(SubsetIndex::full(system.n())))
      throw InvalidArgument("term mentions a coordinate outside the system");
  const int id = system.add_aux({name, extra});
  system.add(LinearConstraint::eq(LinearExpr::term(Coord::aux(id)) - extra, "def:" + name));
  auto [out, rep] = eliminate(system, scenario, cfg);
  if (report) *report = std::move(rep);
  return out;
}

}  // namespace entrocone
