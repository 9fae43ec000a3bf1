#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "entrocone/constraint.hpp"
#include "entrocone/dag.hpp"
#include "entrocone/dist.hpp"
#include "entrocone/parallel.hpp"
#include "entrocone/random.hpp"

namespace entrocone {

enum class StatisticKind { kRaw, kStudentized };

/// A derived inequality turned into a test: T = -(slack) evaluated on
/// plug-in entropies, so that T > 0 means the sample violates it.
struct TestSpec {
  LinearConstraint constraint;          // expr >= 0, no auxiliary terms
  std::vector<std::string> variables;   // names of the constraint's indices
  StatisticKind kind = StatisticKind::kRaw;
  std::size_t samples = 50;             // per experiment
  double level = 0.05;
  std::size_t bootstrap_resamples = 200;
};

struct StatisticValue {
  double value = 0.0;
  /// Studentized statistic whose bootstrap variance was zero; value is +inf.
  bool degenerate = false;
};

namespace detail {

/// Maps the test's variables to sample columns and caches per-coordinate
/// mixed-radix encodings.
class PluginEvaluator {
 public:
  PluginEvaluator(const TestSpec& spec, const StructuralModel& model) {
    if (spec.constraint.mentions_aux()) throw InvalidArgument("test statistic cannot use auxiliary terms");
    std::vector<int> column(spec.variables.size());
    for (std::size_t i = 0; i < spec.variables.size(); ++i) column[i] = model.dag().index_of(spec.variables[i]);
    for (const auto& [c, k] : spec.constraint.expr().coeffs()) {
      Term t;
      t.coeff = -to_double(k);
      std::size_t cells = 1;
      for (int i : c.as_subset().members()) {
        if (i >= static_cast<int>(column.size())) throw InvalidArgument("constraint variable has no name");
        t.columns.push_back(column[i]);
        t.radix.push_back(model.cardinalities()[column[i]]);
        cells *= static_cast<std::size_t>(t.radix.back());
      }
      if (cells > kMaxTableCells) throw ResourceLimit("marginal table too large for plug-in entropy");
      t.cells = cells;
      terms_.push_back(std::move(t));
    }
    constant_ = -to_double(spec.constraint.expr().constant());
  }

  /// T on the rows selected by `rows` (all rows if empty).
  double operator()(const SampleTable& data, const std::vector<std::size_t>& rows = {}) const {
    const std::size_t n = rows.empty() ? data.rows() : rows.size();
    if (n == 0) throw InvalidArgument("empty sample");
    double total = constant_;
    std::vector<int> counts;
    for (const auto& t : terms_) {
      counts.assign(t.cells, 0);
      for (std::size_t r = 0; r < n; ++r) {
        const int* row = data.row(rows.empty() ? r : rows[r]);
        std::size_t cell = 0;
        for (std::size_t k = 0; k < t.columns.size(); ++k)
          cell = cell * static_cast<std::size_t>(t.radix[k]) + static_cast<std::size_t>(row[t.columns[k]]);
        ++counts[cell];
      }
      double h = 0.0;
      const double inv = 1.0 / static_cast<double>(n);
      for (int c : counts)
        if (c > 0) {
          const double p = c * inv;
          h -= p * std::log2(p);
        }
      total += t.coeff * h;
    }
    return total;
  }

 private:
  struct Term {
    double coeff = 0.0;
    std::vector<int> columns;
    std::vector<int> radix;
    std::size_t cells = 1;
  };
  std::vector<Term> terms_;
  double constant_ = 0.0;
};

}  // namespace detail

/// Empirical distribution of the named columns of a sample.
inline JointDistribution empirical_distribution(const SampleTable& data, const StructuralModel& model,
                                                const std::vector<std::string>& variables) {
  std::vector<int> cols, cards;
  for (const auto& v : variables) {
    cols.push_back(model.dag().index_of(v));
    cards.push_back(model.cardinalities()[cols.back()]);
  }
  std::size_t cells = 1;
  for (int c : cards) cells *= static_cast<std::size_t>(c);
  if (cells > kMaxTableCells) throw ResourceLimit("empirical table too large");
  std::vector<double> probs(cells, 0.0);
  if (data.rows() == 0) throw InvalidArgument("empty sample");
  for (std::size_t r = 0; r < data.rows(); ++r) {
    std::size_t cell = 0;
    for (std::size_t k = 0; k < cols.size(); ++k)
      cell = cell * static_cast<std::size_t>(cards[k]) + static_cast<std::size_t>(data.at(r, cols[k]));
    probs[cell] += 1.0;
  }
  for (auto& p : probs) p /= static_cast<double>(data.rows());
  return JointDistribution(variables, cards, std::move(probs));
}

/// Bootstrap variance of the raw statistic; resample b draws from Philox
/// stream (seed, kBootstrap, b).
inline double bootstrap_variance(const TestSpec& spec, const StructuralModel& model, const SampleTable& data,
                                 std::uint64_t seed) {
  const detail::PluginEvaluator eval(spec, model);
  const std::size_t n = data.rows();
  if (spec.bootstrap_resamples < 2) throw InvalidArgument("bootstrap needs at least 2 resamples");
  std::vector<double> values(spec.bootstrap_resamples);
  std::vector<std::size_t> rows(n);
  for (std::size_t b = 0; b < spec.bootstrap_resamples; ++b) {
    StreamRng rng(seed, StreamFamily::kBootstrap, static_cast<std::uint32_t>(b));
    for (auto& r : rows) r = rng.below(static_cast<std::uint32_t>(n));
    values[b] = eval(data, rows);
  }
  double mean = 0.0;
  for (double x : values) mean += x;
  mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double x : values) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(values.size() - 1);
}

/// The test statistic on one sample. The studentized form divides by the
/// bootstrap standard deviation (seeded by `seed`).
inline StatisticValue test_statistic(const TestSpec& spec, const StructuralModel& model, const SampleTable& data,
                                     std::uint64_t seed = 0) {
  const detail::PluginEvaluator eval(spec, model);
  StatisticValue out;
  out.value = eval(data);
  if (spec.kind == StatisticKind::kStudentized) {
    const double var = bootstrap_variance(spec, model, data, seed);
    if (var <= 0.0) {
      out.value = std::numeric_limits<double>::infinity();
      out.degenerate = true;
    } else {
      out.value /= std::sqrt(var);
    }
  }
  return out;
}

/// Statistic values of `runs` independent experiments under `model`.
/// Experiment r samples with seed derive_seed(seed, kExperiment, r) and
/// bootstraps with derive_seed(seed, kBootstrap, r).
inline std::vector<StatisticValue> simulate_statistics(const TestSpec& spec, const StructuralModel& model,
                                                       std::size_t runs, std::uint64_t seed, int threads = 1) {
  const detail::PluginEvaluator eval(spec, model);
  std::vector<StatisticValue> out(runs);
  parallel_for(runs, threads, [&](std::size_t r) {
    const auto data = sample(model, spec.samples, derive_seed(seed, static_cast<std::uint32_t>(StreamFamily::kExperiment), static_cast<std::uint32_t>(r)));
    if (spec.kind == StatisticKind::kRaw) {
      out[r].value = eval(data);
    } else {
      out[r] = test_statistic(spec, model, data,
                              derive_seed(seed, static_cast<std::uint32_t>(StreamFamily::kBootstrap), static_cast<std::uint32_t>(r)));
    }
  });
  return out;
}

struct CalibrationResult {
  double critical_value = 0.0;
  /// Half-width of the order-statistic interval one binomial standard
  /// error around the quantile index.
  double standard_error = 0.0;
  double level = 0.05;
  std::size_t runs = 0;
  double rejection_rate = 0.0;  // fraction of null runs with T > t
  std::size_t degenerate = 0;
};

/// Smallest observed t with P̂(T > t) <= level.
inline CalibrationResult calibrate(const TestSpec& spec, const StructuralModel& null_model, std::size_t runs,
                                   std::uint64_t seed, int threads = 1) {
  if (runs == 0) throw InvalidArgument("calibration needs at least one run");
  if (!(spec.level > 0.0 && spec.level < 1.0)) throw InvalidArgument("level must lie in (0, 1)");
  const auto stats = simulate_statistics(spec, null_model, runs, seed, threads);
  std::vector<double> v;
  CalibrationResult res;
  for (const auto& s : stats) {
    v.push_back(s.value);
    res.degenerate += s.degenerate ? 1 : 0;
  }
  std::sort(v.begin(), v.end());
  const double R = static_cast<double>(runs);
  auto k = static_cast<std::size_t>(std::ceil((1.0 - spec.level) * R - 1e-9));
  k = std::clamp<std::size_t>(k, 1, runs) - 1;
  res.critical_value = v[k];
  const auto delta = static_cast<std::size_t>(std::ceil(std::sqrt(R * spec.level * (1.0 - spec.level))));
  const std::size_t lo = k >= delta ? k - delta : 0;
  const std::size_t hi = std::min(runs - 1, k + delta);
  res.standard_error = (v[hi] - v[lo]) / 2.0;
  res.level = spec.level;
  res.runs = runs;
  std::size_t above = 0;
  for (double x : v) above += x > res.critical_value ? 1 : 0;
  res.rejection_rate = static_cast<double>(above) / R;
  return res;
}

struct PowerPoint {
  double parameter = 0.0;
  double power = 0.0;
  double standard_error = 0.0;
  std::size_t runs = 0;
};

/// Rejection rate (T > t) at each parameter value; grid point g uses seed
/// derive_seed(seed, kExperiment, 1000000 + g) for its experiments.
inline std::vector<PowerPoint> power_curve(const TestSpec& spec, double critical_value,
                                           const std::function<StructuralModel(double)>& family,
                                           const std::vector<double>& grid, std::size_t runs, std::uint64_t seed,
                                           int threads = 1) {
  if (runs == 0) throw InvalidArgument("power curve needs at least one run");
  std::vector<PowerPoint> out;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const StructuralModel model = family(grid[g]);
    const auto stats = simulate_statistics(
        spec, model, runs, derive_seed(seed, static_cast<std::uint32_t>(StreamFamily::kExperiment), static_cast<std::uint32_t>(1000000 + g)),
        threads);
    std::size_t rejected = 0;
    for (const auto& s : stats) rejected += s.value > critical_value ? 1 : 0;
    PowerPoint p;
    p.parameter = grid[g];
    p.runs = runs;
    p.power = static_cast<double>(rejected) / static_cast<double>(runs);
    p.standard_error = std::sqrt(p.power * (1.0 - p.power) / static_cast<double>(runs));
    out.push_back(p);
  }
  return out;
}

}  // namespace entrocone
