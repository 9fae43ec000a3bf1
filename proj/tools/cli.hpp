#pragma once

#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include <CLI11.hpp>

#include "entrocone.hpp"

namespace entrocone::cli {

enum ExitCode { kOk = 0, kViolation = 1, kInputError = 2, kResourceError = 3, kInternalError = 4 };

inline std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return os.str();
}

/// Subcommand, resolved configuration, input digests, tool version and
/// seed of one run. Re-running `argv` on inputs with the recorded digests
/// reproduces every output.
class RunManifest {
 public:
  RunManifest(std::string subcommand, std::vector<std::string> argv)
      : subcommand_(std::move(subcommand)), argv_(std::move(argv)) {}

  /// Reads an input file and records its digest.
  std::string read_input(const std::string& path) {
    std::string text = io::read_text_file(path);
    inputs_.push_back(io::Json{{"path", path}, {"sha256", sha256_hex(text)}});
    return text;
  }
  io::Json read_json_input(const std::string& path) { return io::parse_json(read_input(path), path); }

  io::Json& config() { return config_; }
  void set_seed(std::uint64_t seed) { seed_ = seed; }

  io::Json to_json() const {
    io::Json j{{"tool", "entrocone"}, {"version", kVersion}, {"subcommand", subcommand_}, {"argv", argv_}};
    j["config"] = config_;
    j["inputs"] = inputs_;
    if (seed_) j["seed"] = *seed_;
    return j;
  }

 private:
  std::string subcommand_;
  std::vector<std::string> argv_;
  io::Json config_ = io::Json::object();
  io::Json inputs_ = io::Json::array();
  std::optional<std::uint64_t> seed_;
};

/// "out.json" -> "out.manifest.json".
inline std::string manifest_path_for(const std::string& output) {
  std::filesystem::path p(output);
  if (p.extension() == ".json" || p.extension() == ".csv") p.replace_extension();
  return p.string() + ".manifest.json";
}

namespace detail {

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  for (auto& part : io::detail::split(s, ',')) {
    while (!part.empty() && part.front() == ' ') part.erase(part.begin());
    while (!part.empty() && part.back() == ' ') part.pop_back();
    if (!part.empty()) out.push_back(part);
  }
  return out;
}

inline SubsetIndex subset_of_names(const Dag& dag, const std::string& list) {
  SubsetIndex s;
  for (const auto& nm : split_list(list)) s = s.with(dag.index_of(nm));
  if (s.empty()) throw InvalidArgument("empty variable list");
  return s;
}

/// "start:step:stop" or a comma-separated list; range points are exact
/// multiples of the step.
inline std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    const auto parts = io::detail::split(text, ':');
    if (parts.size() != 3) throw InvalidArgument("grid range must be start:step:stop");
    const Rational a = parse_rational(parts[0]), step = parse_rational(parts[1]), b = parse_rational(parts[2]);
    if (sgn(step) <= 0 || b < a) throw InvalidArgument("grid needs start <= stop and a positive step");
    Rational count_q = (b - a) / step;
    mpz_class count;
    mpz_fdiv_q(count.get_mpz_t(), count_q.get_num_mpz_t(), count_q.get_den_mpz_t());
    if (count > 100000) throw InvalidArgument("grid has too many points");
    for (long i = 0; i <= count.get_si(); ++i) out.push_back(to_double(Rational(a + step * i)));
  } else {
    for (const auto& p : split_list(text)) out.push_back(to_double(parse_rational(p)));
  }
  if (out.empty()) throw InvalidArgument("empty grid");
  return out;
}

inline std::size_t max_inequalities(std::optional<std::size_t> flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("ENTROCONE_MAX_INEQS")) {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(env, &used);
      if (used != std::string(env).size() || v == 0) throw std::invalid_argument("bad");
      return static_cast<std::size_t>(v);
    } catch (const std::logic_error&) {
      throw InvalidArgument(std::string("ENTROCONE_MAX_INEQS is not a positive integer: ") + env);
    }
  }
  return EliminationConfig{}.max_inequalities;
}

inline void print_system(const ConstraintSystem& sys, const std::vector<LinearConstraint>& ineqs, std::ostream& out,
                         const FacetClassifier* classifier = nullptr) {
  out << "# " << ineqs.size() << " inequalities, " << sys.equalities().size() << " equalities over ";
  for (std::size_t i = 0; i < sys.names().size(); ++i) out << (i ? "," : "") << sys.names()[i];
  out << '\n';
  for (const auto& t : sys.aux_terms()) out << "# " << t.name << " := " << render_information_form(t.definition, sys) << '\n';
  for (const auto& c : ineqs) {
    out << render(c, sys);
    if (classifier) out << "  # " << to_string(classifier->classify(c));
    out << '\n';
  }
  for (const auto& c : sys.equalities()) out << render(c, sys) << '\n';
}

struct Statistic {
  LinearConstraint constraint;
  std::vector<std::string> variables;
  std::string source;
};

/// "--statistic" accepts an inline inequality over the model's observables
/// ("I(V1:V2) + I(V1:V3) <= H(V1)"), a catalog entry name, or a constraint
/// file, the last two optionally suffixed "#k" to pick inequality k.
inline Statistic resolve_statistic(const std::string& text, const StructuralModel& model, RunManifest& manifest) {
  Statistic st;
  st.source = text;
  if (text.find(">=") != std::string::npos || text.find("<=") != std::string::npos) {
    std::vector<std::string> names;
    for (int i : model.dag().observables().members()) names.push_back(model.dag().node(i).name);
    const ConstraintSystem sys(static_cast<int>(names.size()), names);
    st.constraint = parse_constraint(text, sys);
    if (st.constraint.is_equality()) throw InvalidArgument("statistic must be an inequality");
    st.variables = names;
    return st;
  }
  std::string name = text;
  std::size_t index = 0;
  if (const auto hash = text.rfind('#'); hash != std::string::npos) {
    name = text.substr(0, hash);
    try {
      std::size_t used = 0;
      index = std::stoul(text.substr(hash + 1), &used);
      if (used != text.size() - hash - 1) throw std::invalid_argument("bad");
    } catch (const std::logic_error&) {
      throw InvalidArgument("bad inequality index in '" + text + "'");
    }
  }
  std::optional<ConstraintSystem> sys;
  for (const auto& e : catalog::entries())
    if (e.name == name) sys = e.system;
  if (!sys) sys = io::system_from_json(manifest.read_json_input(name));
  if (index >= sys->inequalities().size())
    throw InvalidArgument("'" + name + "' has " + std::to_string(sys->inequalities().size()) + " inequalities");
  st.constraint = sys->inequalities()[index];
  if (st.constraint.mentions_aux()) throw InvalidArgument("statistic cannot use auxiliary terms");
  st.variables = sys->names();
  return st;
}

struct StatsOptions {
  std::string statistic;
  std::size_t samples = 50;
  double level = 0.05;
  std::size_t runs = 10000;
  std::uint64_t seed = 0;
  bool studentized = false;
  std::size_t bootstrap = 200;
  int threads = 1;
  std::string out_prefix;
};

inline void add_stats_options(CLI::App* cmd, StatsOptions& o) {
  cmd->add_option("--statistic", o.statistic, "inequality, catalog name[#k] or constraint file[#k]")->required();
  cmd->add_option("--n", o.samples, "samples per experiment")->check(CLI::PositiveNumber);
  cmd->add_option("--runs", o.runs, "Monte Carlo experiments")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", o.seed, "random seed")->required();
  cmd->add_flag("--studentized", o.studentized, "divide by the bootstrap standard deviation");
  cmd->add_option("--bootstrap", o.bootstrap, "bootstrap resamples for --studentized")->check(CLI::Range(2, 1000000));
  cmd->add_option("--threads", o.threads, "worker threads")->check(CLI::Range(1, 1024));
  cmd->add_option("--out", o.out_prefix, "write PREFIX.json, PREFIX.csv and PREFIX.manifest.json");
}

inline TestSpec make_test(const StatsOptions& o, const Statistic& st) {
  TestSpec spec;
  spec.constraint = st.constraint;
  spec.variables = st.variables;
  spec.kind = o.studentized ? StatisticKind::kStudentized : StatisticKind::kRaw;
  spec.samples = o.samples;
  spec.level = o.level;
  spec.bootstrap_resamples = o.bootstrap;
  return spec;
}

inline void record_stats_config(RunManifest& m, const StatsOptions& o, const Statistic& st) {
  auto& c = m.config();
  c["statistic"] = st.source;
  c["constraint"] = st.constraint.label();
  c["variables"] = st.variables;
  c["samples"] = o.samples;
  c["runs"] = o.runs;
  c["kind"] = o.studentized ? "studentized" : "raw";
  if (o.studentized) c["bootstrap"] = o.bootstrap;
  m.set_seed(o.seed);
}

}  // namespace detail

/// Runs the command line `args` (without the program name).
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"entrocone: Shannon-type entropic inequalities for causal structures with hidden variables"};
  app.name("entrocone");
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  // derive
  auto* derive = app.add_subcommand("derive", "project the DAG's entropy cone onto a marginal scenario");
  std::string dag_file;
  std::string observe;
  std::optional<std::string> pairwise;
  std::vector<std::string> marginals, drops, terms, epsilons;
  std::string ci_mode = "pairwise";
  bool no_dag = false, nontrivial_only = false, dag_specific_only = false, classify = false, timings = false;
  std::string out_file, report_file;
  int threads = 1;
  std::optional<std::size_t> max_ineqs;
  derive->add_option("dag", dag_file, "DAG or model JSON file")->required();
  derive->add_option("--observe", observe, "keep all subsets of these variables (default: all observables)");
  derive->add_option("--pairwise", pairwise, "keep singletons and pairs (of the listed variables, or all observables)")
      ->expected(0, 1)
      ->default_str("");
  derive->add_option("--marginal", marginals, "keep this subset and its subsets (repeatable)");
  derive->add_option("--drop", drops, "remove this subset from the scenario (repeatable)");
  derive->add_option("--term", terms, "keep a term: NAME=EXPR or EXPR, e.g. 'I(Y:U2)' (repeatable)");
  derive->add_option("--epsilon", epsilons, "add EXPR <= VALUE, e.g. 'I(X:Y|Z)=0.01' (repeatable)");
  derive->add_option("--ci-mode", ci_mode, "independences imposed: pairwise or saturated")
      ->check(CLI::IsMember({"pairwise", "saturated"}));
  derive->add_flag("--no-dag", no_dag, "start from the unconstrained Shannon cone");
  derive->add_flag("--nontrivial-only", nontrivial_only, "drop inequalities implied by Shannon inequalities on observables");
  derive->add_flag("--dag-specific-only", dag_specific_only, "keep only inequalities that need the DAG");
  derive->add_flag("--classify", classify, "annotate each inequality with the weakest premise implying it");
  derive->add_option("--out", out_file, "write the constraint system as JSON");
  derive->add_option("--report", report_file, "write the elimination report as JSON");
  derive->add_flag("--timings", timings, "print and record timings");
  derive->add_option("--threads", threads, "worker threads")->check(CLI::Range(1, 1024));
  derive->add_option("--max-ineqs", max_ineqs, "intermediate inequality cap (also ENTROCONE_MAX_INEQS)")
      ->check(CLI::PositiveNumber);

  // check
  auto* check = app.add_subcommand("check", "evaluate a constraint file on a distribution");
  std::string constraint_file, dist_file, check_json;
  double tol = kDefaultTolerance;
  check->add_option("constraints", constraint_file, "constraint JSON file")->required();
  check->add_option("distribution", dist_file, "distribution or model JSON file")->required();
  check->add_option("--tol", tol, "tolerance in bits")->check(CLI::NonNegativeNumber);
  check->add_option("--json", check_json, "write the evaluation as JSON");

  // bound
  auto* bound = app.add_subcommand("bound", "lower-bound the causal strength of an edge");
  std::string bound_dag, edge, bound_dist, bound_json;
  bound->add_option("dag", bound_dag, "DAG or model JSON file")->required();
  bound->add_option("edge", edge, "edge as SOURCE->TARGET")->required();
  bound->add_option("distribution", bound_dist, "distribution or model JSON file")->required();
  bound->add_option("--json", bound_json, "write the bound as JSON");
  bound->add_option("--threads", threads, "worker threads")->check(CLI::Range(1, 1024));

  // calibrate
  auto* calibrate = app.add_subcommand("calibrate", "Monte Carlo critical value under a null model");
  detail::StatsOptions cal;
  std::string null_file;
  detail::add_stats_options(calibrate, cal);
  calibrate->add_option("--null", null_file, "null model JSON file")->required();
  calibrate->add_option("--level", cal.level, "test level")->check(CLI::Range(0.0, 1.0));

  // power
  auto* power = app.add_subcommand("power", "rejection rate over a model family with parameter q");
  detail::StatsOptions pw;
  std::string family_file, grid_text;
  double critical = 0.0;
  detail::add_stats_options(power, pw);
  power->add_option("--model", family_file, "model JSON file whose probabilities may use q")->required();
  power->add_option("--t", critical, "critical value; reject when T > t")->required();
  power->add_option("--grid", grid_text, "values of q: start:step:stop or a list")->required();

  // simulate
  auto* simulate = app.add_subcommand("simulate", "draw samples from a model");
  std::string sim_model, sim_out;
  std::size_t sim_n = 0;
  std::uint64_t sim_seed = 0;
  std::optional<double> sim_q;
  bool sim_all = false;
  simulate->add_option("--model", sim_model, "model JSON file")->required();
  simulate->add_option("--n", sim_n, "number of samples")->required();
  simulate->add_option("--seed", sim_seed, "random seed")->required();
  simulate->add_option("--q", sim_q, "parameter value for models that use q");
  simulate->add_flag("--all", sim_all, "include hidden variables");
  simulate->add_option("--out", sim_out, "write the samples as CSV");

  // catalog
  auto* cat = app.add_subcommand("catalog", "list the shipped inequality families");
  std::string show, write_dir;
  cat->add_option("--show", show, "print one entry");
  cat->add_option("--write", write_dir, "write every entry as DIR/NAME.json");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }

  std::vector<std::string> argv{"entrocone"};
  argv.insert(argv.end(), args.begin(), args.end());

  try {
    if (derive->parsed()) {
      RunManifest manifest("derive", argv);
      const Dag dag = io::dag_from_json(manifest.read_json_input(dag_file));
      const CiMode mode = ci_mode == "saturated" ? CiMode::kSaturated : CiMode::kPairwiseSingleton;
      ConstraintSystem sys = no_dag ? elementary_inequalities(dag.size(), dag.names()) : constrained_cone(dag, mode);

      const int scenario_flags = (!observe.empty()) + pairwise.has_value() + (!marginals.empty());
      if (scenario_flags > 1) throw InvalidArgument("use only one of --observe, --pairwise and --marginal");
      MarginalScenario scenario;
      if (!observe.empty()) {
        scenario = make_scenario(dag.size(), {detail::subset_of_names(dag, observe)});
      } else if (pairwise) {
        const SubsetIndex vars = pairwise->empty() ? dag.observables() : detail::subset_of_names(dag, *pairwise);
        scenario = scenario_pairwise(dag.size(), vars.members());
      } else if (!marginals.empty()) {
        std::vector<SubsetIndex> subs;
        for (const auto& m : marginals) subs.push_back(detail::subset_of_names(dag, m));
        scenario = make_scenario(dag.size(), subs);
      } else {
        scenario = scenario_observable(dag);
      }
      if (!drops.empty()) {
        std::vector<SubsetIndex> d;
        for (const auto& s : drops) d.push_back(detail::subset_of_names(dag, s));
        for (auto s : d)
          if (!scenario.contains(s)) throw InvalidArgument("--drop subset is not in the scenario");
        scenario = scenario_without(scenario, d);
      }

      for (const auto& e : epsilons) {
        const auto eqpos = e.rfind('=');
        if (eqpos == std::string::npos) throw InvalidArgument("--epsilon needs EXPR=VALUE");
        const LinearExpr lhs = parse_expression(e.substr(0, eqpos), sys);
        const Rational value = parse_rational(e.substr(eqpos + 1));
        if (sgn(value) < 0) throw InvalidArgument("epsilon must be nonnegative");
        sys.add(LinearConstraint::ge(LinearExpr(value) - lhs, "eps:" + e));
      }
      for (const auto& t : terms) {
        std::string name = t, text = t;
        if (const auto eqpos = t.find('='); eqpos != std::string::npos) {
          name = t.substr(0, eqpos);
          text = t.substr(eqpos + 1);
        }
        const LinearExpr def = parse_expression(text, sys);
        for (const auto& [c, k] : def.coeffs())
          if (c.is_aux()) throw InvalidArgument("term definitions cannot use other terms");
        for (const auto& other : sys.aux_terms())
          if (other.name == name) throw InvalidArgument("duplicate term name: " + name);
        const int id = sys.add_aux({name, def});
        sys.add(LinearConstraint::eq(LinearExpr::term(Coord::aux(id)) - def, "def:" + name));
      }

      EliminationConfig cfg;
      cfg.max_inequalities = detail::max_inequalities(max_ineqs);
      cfg.threads = threads;
      auto [result, report] = eliminate(sys, scenario, cfg);

      std::vector<LinearConstraint> shown = result.inequalities();
      if (nontrivial_only || dag_specific_only)
        shown = nontrivial_inequalities(result, scenario,
                                        dag_specific_only ? FacetKind::kDagSpecific : FacetKind::kShannon);
      ConstraintSystem written(result.n(), result.names());
      written.set_aux_terms(result.aux_terms());
      written.add_all(shown);
      written.add_all(result.equalities());

      std::optional<FacetClassifier> classifier;
      if (classify) classifier.emplace(result, scenario);
      detail::print_system(written, shown, out, classifier ? &*classifier : nullptr);
      if (timings) err << "elimination: " << report.total_seconds << " s\n";

      auto& c = manifest.config();
      c["ci_mode"] = no_dag ? "none" : ci_mode;
      io::Json kept = io::Json::array();
      for (auto s : scenario.kept) kept.push_back(io::coord_key(Coord::subset(s), sys));
      c["scenario"] = kept;
      c["terms"] = terms;
      c["epsilon"] = epsilons;
      c["filter"] = dag_specific_only ? "dag-specific" : nontrivial_only ? "nontrivial" : "none";
      c["max_inequalities"] = cfg.max_inequalities;
      if (!out_file.empty()) {
        io::write_text_file(out_file, io::dump(io::system_to_json(written)));
        io::write_text_file(manifest_path_for(out_file), io::dump(manifest.to_json()));
      }
      if (!report_file.empty()) io::write_text_file(report_file, io::dump(io::report_to_json(report, result, timings)));
      return kOk;
    }

    if (check->parsed()) {
      RunManifest manifest("check", argv);
      const ConstraintSystem sys = io::system_from_json(manifest.read_json_input(constraint_file));
      const JointDistribution dist = io::distribution_or_model_from_json(manifest.read_json_input(dist_file));
      const EvaluationResult r = evaluate(sys, dist, tol);
      std::size_t k = 0;
      auto row = [&](const LinearConstraint& c) {
        std::ostringstream slack;
        slack << std::fixed << std::setprecision(9) << r.slack[k];
        const bool bad = r.slack[k] < -tol;
        out << std::setw(14) << slack.str() << "  " << (bad ? "VIOLATED " : "ok       ") << render(c, sys) << '\n';
        ++k;
      };
      for (const auto& c : sys.inequalities()) row(c);
      for (const auto& c : sys.equalities()) row(c);
      out << to_string(r.verdict) << '\n';
      manifest.config()["tolerance"] = tol;
      if (!check_json.empty()) {
        io::write_text_file(check_json, io::dump(io::evaluation_to_json(r, sys)));
        io::write_text_file(manifest_path_for(check_json), io::dump(manifest.to_json()));
      }
      return r.verdict == Verdict::kViolated ? kViolation : kOk;
    }

    if (bound->parsed()) {
      RunManifest manifest("bound", argv);
      const Dag dag = io::dag_from_json(manifest.read_json_input(bound_dag));
      const auto arrow = edge.find("->");
      if (arrow == std::string::npos) throw InvalidArgument("edge must be written SOURCE->TARGET");
      const JointDistribution dist = io::distribution_or_model_from_json(manifest.read_json_input(bound_dist));
      EliminationConfig cfg;
      cfg.threads = threads;
      const auto b = causal_strength_bound(dag, edge.substr(0, arrow), edge.substr(arrow + 2), dist, cfg);
      out << "C(" << b.source << "->" << b.target << ") >= " << std::fixed << std::setprecision(9) << b.bound
          << (b.vacuous ? "  (vacuous)" : "") << '\n';
      for (const auto& d : b.derivation) out << "  " << d << '\n';
      manifest.config()["edge"] = edge;
      if (!bound_json.empty()) {
        io::write_text_file(bound_json, io::dump(io::bound_to_json(b)));
        io::write_text_file(manifest_path_for(bound_json), io::dump(manifest.to_json()));
      }
      return kOk;
    }

    if (calibrate->parsed()) {
      RunManifest manifest("calibrate", argv);
      const StructuralModel null_model = io::model_from_json(manifest.read_json_input(null_file));
      const auto st = detail::resolve_statistic(cal.statistic, null_model, manifest);
      const auto res = entrocone::calibrate(detail::make_test(cal, st), null_model, cal.runs, cal.seed, cal.threads);
      out << std::setprecision(6) << "t = " << res.critical_value << "  (standard error " << res.standard_error
          << ", rejection rate " << res.rejection_rate << ", " << res.runs << " runs)\n";
      detail::record_stats_config(manifest, cal, st);
      manifest.config()["level"] = cal.level;
      if (!cal.out_prefix.empty()) {
        io::write_text_file(cal.out_prefix + ".json", io::dump(io::calibration_to_json(res)));
        io::write_text_file(cal.out_prefix + ".csv", io::calibration_to_csv(res));
        io::write_text_file(cal.out_prefix + ".manifest.json", io::dump(manifest.to_json()));
      }
      return kOk;
    }

    if (power->parsed()) {
      RunManifest manifest("power", argv);
      const io::Json family_json = manifest.read_json_input(family_file);
      const auto grid = detail::parse_grid(grid_text);
      const StructuralModel first = io::model_from_json(family_json, grid.front());
      const auto st = detail::resolve_statistic(pw.statistic, first, manifest);
      const auto curve = power_curve(
          detail::make_test(pw, st), critical,
          [&](double q) { return io::model_from_json(family_json, q); }, grid, pw.runs, pw.seed, pw.threads);
      out << io::power_to_csv(curve);
      detail::record_stats_config(manifest, pw, st);
      manifest.config()["critical_value"] = critical;
      manifest.config()["grid"] = grid;
      if (!pw.out_prefix.empty()) {
        io::write_text_file(pw.out_prefix + ".json", io::dump(io::power_to_json(curve, critical)));
        io::write_text_file(pw.out_prefix + ".csv", io::power_to_csv(curve));
        io::write_text_file(pw.out_prefix + ".manifest.json", io::dump(manifest.to_json()));
      }
      return kOk;
    }

    if (simulate->parsed()) {
      RunManifest manifest("simulate", argv);
      const StructuralModel model = io::model_from_json(manifest.read_json_input(sim_model), sim_q);
      const SampleTable data = sample(model, sim_n, sim_seed);
      const SubsetIndex cols = sim_all ? SubsetIndex::full(model.size()) : model.dag().observables();
      const std::string csv = io::sample_to_csv(data, model.dag(), cols);
      manifest.set_seed(sim_seed);
      manifest.config()["samples"] = sim_n;
      manifest.config()["hidden_included"] = sim_all;
      if (sim_q) manifest.config()["q"] = *sim_q;
      if (sim_out.empty()) {
        out << csv;
      } else {
        io::write_text_file(sim_out, csv);
        io::write_text_file(manifest_path_for(sim_out), io::dump(manifest.to_json()));
      }
      return kOk;
    }

    if (cat->parsed()) {
      const auto entries = catalog::entries();
      bool found = show.empty();
      for (const auto& e : entries) {
        if (!show.empty()) {
          if (e.name != show) continue;
          found = true;
          out << "# " << e.name << ": " << e.description << '\n';
          detail::print_system(e.system, e.system.inequalities(), out);
          continue;
        }
        out << std::left << std::setw(28) << e.name << std::setw(4) << e.system.inequalities().size() << e.description
            << '\n';
      }
      if (!found) throw InvalidArgument("no catalog entry named '" + show + "'");
      if (!write_dir.empty()) {
        std::filesystem::create_directories(write_dir);
        for (const auto& e : entries) {
          io::Json j{{"description", e.description}};
          j.update(io::system_to_json(e.system));
          io::write_text_file((std::filesystem::path(write_dir) / (e.name + ".json")).string(), io::dump(j));
        }
      }
      return kOk;
    }
  } catch (const ResourceLimit& e) {
    err << "resource limit: " << e.what() << '\n';
    return kResourceError;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternalError;
  }
  return kOk;
}

}  // namespace entrocone::cli
