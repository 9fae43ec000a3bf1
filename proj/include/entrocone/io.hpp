#pragma once

#include <charconv>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "entrocone/constraint.hpp"
#include "entrocone/dag.hpp"
#include "entrocone/dist.hpp"
#include "entrocone/expr.hpp"
#include "entrocone/project.hpp"
#include "entrocone/stats.hpp"
#include "entrocone/witness.hpp"

namespace entrocone::io {

using Json = nlohmann::ordered_json;

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + path);
  out << text;
  if (!out) throw InvalidArgument("write failed: " + path);
}

inline Json parse_json(const std::string& text, const std::string& origin = "input") {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidArgument(origin + ": " + e.what());
  }
}

inline Json read_json_file(const std::string& path) { return parse_json(read_text_file(path), path); }

/// Pretty JSON with a trailing newline.
inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

namespace detail {

inline void check_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& what) {
  if (!j.is_object()) throw InvalidArgument(what + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw InvalidArgument("unknown field '" + key + "' in " + what);
  }
}

inline const Json& required(const Json& j, const char* key, const std::string& what) {
  if (!j.contains(key)) throw InvalidArgument(what + " lacks field '" + key + "'");
  return j.at(key);
}

template <class T>
T get(const Json& j, const std::string& what) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw InvalidArgument("wrong type for " + what);
  }
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

/// A probability that may depend on a scalar parameter q: a number, or a
/// string affine in q such as "q", "1-q", "0.5*q + 0.25".
inline double parameter_value(const Json& j, std::optional<double> q, const std::string& what) {
  if (j.is_number()) return j.get<double>();
  if (!j.is_string()) throw InvalidArgument(what + " must be a number or an expression in q");
  const std::string s = j.get<std::string>();
  double total = 0.0;
  std::size_t pos = 0;
  bool any = false;
  while (pos < s.size()) {
    while (pos < s.size() && s[pos] == ' ') ++pos;
    if (pos == s.size()) break;
    double sign = 1.0;
    if (s[pos] == '+' || s[pos] == '-') {
      sign = s[pos] == '-' ? -1.0 : 1.0;
      ++pos;
    } else if (any) {
      throw InvalidArgument("bad parameter expression '" + s + "' in " + what);
    }
    while (pos < s.size() && s[pos] == ' ') ++pos;
    std::size_t end = pos;
    while (end < s.size() && s[end] != '+' && s[end] != '-') ++end;
    std::string token = s.substr(pos, end - pos);
    while (!token.empty() && token.back() == ' ') token.pop_back();
    pos = end;
    double factor = 1.0;
    bool uses_q = false;
    if (!token.empty() && token.back() == 'q') {
      uses_q = true;
      token.pop_back();
      while (!token.empty() && (token.back() == ' ' || token.back() == '*')) token.pop_back();
    }
    if (!token.empty()) factor = to_double(parse_rational(token));
    if (uses_q) {
      if (!q) throw InvalidArgument(what + " depends on q but no parameter value was given");
      factor *= *q;
    }
    total += sign * factor;
    any = true;
  }
  if (!any) throw InvalidArgument("empty parameter expression in " + what);
  return total;
}

inline std::vector<double> probability_list(const Json& j, std::optional<double> q, const std::string& what) {
  if (!j.is_array()) throw InvalidArgument(what + " must be an array");
  std::vector<double> out;
  for (const auto& x : j) out.push_back(parameter_value(x, q, what));
  return out;
}

inline bool mentions_parameter(const Json& j) {
  if (j.is_string()) return j.get<std::string>().find('q') != std::string::npos;
  if (j.is_array() || j.is_object())
    for (const auto& x : j) {
      if (mentions_parameter(x)) return true;
    }
  return false;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Rationals

/// Integers as JSON numbers, other rationals as "p/q" strings.
inline Json rational_to_json(const Rational& q) {
  if (q.get_den() == 1 && q.get_num().fits_slong_p()) return q.get_num().get_si();
  return q.get_str();
}

/// Accepts integers, exact strings ("2/3", "0.125") and floating literals,
/// which are read through their shortest decimal form.
inline Rational rational_from_json(const Json& j, const std::string& what) {
  if (j.is_number_integer()) {
    if (j.is_number_unsigned()) return Rational(Integer(std::to_string(j.get<std::uint64_t>())));
    return Rational(Integer(std::to_string(j.get<std::int64_t>())));
  }
  if (j.is_number_float()) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, j.get<double>());
    return parse_rational(std::string(buf, res.ptr));
  }
  if (j.is_string()) return parse_rational(j.get<std::string>());
  throw InvalidArgument(what + " must be a number or a rational string");
}

// ---------------------------------------------------------------------------
// DAGs and models

/// {"nodes": ["X", {"name": "U", "observable": false}], "edges": [["U", "X"]]}.
/// Model fields are tolerated so that a model file also serves as a DAG.
inline Dag dag_from_json(const Json& j) {
  detail::check_keys(j, {"description", "nodes", "edges", "cardinalities", "mechanisms"}, "DAG");
  std::vector<DagNode> nodes;
  const Json& jn = detail::required(j, "nodes", "DAG");
  if (!jn.is_array()) throw InvalidArgument("DAG nodes must be an array");
  for (const auto& n : jn) {
    if (n.is_string()) {
      nodes.push_back({n.get<std::string>(), true});
    } else {
      detail::check_keys(n, {"name", "observable"}, "node");
      DagNode node;
      node.name = detail::get<std::string>(detail::required(n, "name", "node"), "node name");
      if (n.contains("observable")) node.observable = detail::get<bool>(n.at("observable"), "node observable flag");
      nodes.push_back(std::move(node));
    }
  }
  std::vector<std::pair<std::string, std::string>> edges;
  if (j.contains("edges")) {
    if (!j.at("edges").is_array()) throw InvalidArgument("DAG edges must be an array");
    for (const auto& e : j.at("edges")) {
      if (!e.is_array() || e.size() != 2) throw InvalidArgument("each edge must be a [parent, child] pair");
      edges.emplace_back(detail::get<std::string>(e[0], "edge endpoint"), detail::get<std::string>(e[1], "edge endpoint"));
    }
  }
  return Dag::from_edges(std::move(nodes), edges);
}

inline Json dag_to_json(const Dag& dag) {
  Json nodes = Json::array();
  for (int i = 0; i < dag.size(); ++i) {
    if (dag.node(i).observable) {
      nodes.push_back(dag.node(i).name);
    } else {
      nodes.push_back(Json{{"name", dag.node(i).name}, {"observable", false}});
    }
  }
  Json edges = Json::array();
  for (int c = 0; c < dag.size(); ++c)
    for (int p : dag.parents(c).members()) edges.push_back(Json::array({dag.node(p).name, dag.node(c).name}));
  return Json{{"nodes", nodes}, {"edges", edges}};
}

/// True if some probability of the model file is written in terms of q.
inline bool model_has_parameter(const Json& j) { return j.contains("mechanisms") && detail::mentions_parameter(j.at("mechanisms")); }

/// A DAG plus "cardinalities" {name: k} and "mechanisms" {name: mechanism}:
/// {"type": "cpt", "rows": [[p...]...]}, {"type": "function", "noise": [p...],
/// "outputs": [v...]} or {"type": "uniform"}. Probabilities may be strings
/// affine in q, resolved with `q`.
inline StructuralModel model_from_json(const Json& j, std::optional<double> q = std::nullopt) {
  const Dag dag = dag_from_json(j);
  const Json& jc = detail::required(j, "cardinalities", "model");
  const Json& jm = detail::required(j, "mechanisms", "model");
  if (!jc.is_object() || !jm.is_object()) throw InvalidArgument("cardinalities and mechanisms must be objects");
  for (const auto& [k, v] : jc.items()) (void)dag.index_of(k);
  for (const auto& [k, v] : jm.items()) (void)dag.index_of(k);
  std::vector<int> cards;
  for (int i = 0; i < dag.size(); ++i) {
    const std::string& nm = dag.node(i).name;
    if (!jc.contains(nm)) throw InvalidArgument("no cardinality for " + nm);
    cards.push_back(detail::get<int>(jc.at(nm), "cardinality of " + nm));
    if (cards.back() < 1) throw InvalidArgument("cardinality of " + nm + " must be positive");
  }
  std::vector<Mechanism> mechs;
  for (int i = 0; i < dag.size(); ++i) {
    const std::string& nm = dag.node(i).name;
    if (!jm.contains(nm)) throw InvalidArgument("no mechanism for " + nm);
    const Json& m = jm.at(nm);
    const std::string what = "mechanism of " + nm;
    detail::check_keys(m, {"type", "rows", "noise", "outputs"}, what);
    const auto type = detail::get<std::string>(detail::required(m, "type", what), what + " type");
    if (type == "cpt") {
      detail::check_keys(m, {"type", "rows"}, what);
      CptMechanism cpt;
      const Json& rows = detail::required(m, "rows", what);
      if (!rows.is_array()) throw InvalidArgument(what + " rows must be an array");
      for (const auto& r : rows) cpt.rows.push_back(detail::probability_list(r, q, what));
      mechs.emplace_back(std::move(cpt));
    } else if (type == "function") {
      detail::check_keys(m, {"type", "noise", "outputs"}, what);
      FunctionMechanism f;
      f.noise = m.contains("noise") ? detail::probability_list(m.at("noise"), q, what) : std::vector<double>{1.0};
      f.outputs = detail::get<std::vector<int>>(detail::required(m, "outputs", what), what + " outputs");
      mechs.emplace_back(std::move(f));
    } else if (type == "uniform") {
      detail::check_keys(m, {"type"}, what);
      std::size_t rows = 1;
      for (int p : dag.parents(i).members()) rows *= static_cast<std::size_t>(cards[p]);
      CptMechanism cpt;
      cpt.rows.assign(rows, std::vector<double>(static_cast<std::size_t>(cards[i]), 1.0 / cards[i]));
      mechs.emplace_back(std::move(cpt));
    } else {
      throw InvalidArgument("unknown mechanism type '" + type + "' for " + nm);
    }
  }
  return StructuralModel(dag, std::move(cards), std::move(mechs));
}

inline Json model_to_json(const StructuralModel& model) {
  Json j = dag_to_json(model.dag());
  Json cards = Json::object();
  Json mechs = Json::object();
  for (int i = 0; i < model.size(); ++i) {
    const std::string& nm = model.dag().node(i).name;
    cards[nm] = model.cardinalities()[i];
    std::visit(
        [&](const auto& m) {
          using M = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<M, CptMechanism>) {
            mechs[nm] = Json{{"type", "cpt"}, {"rows", m.rows}};
          } else {
            mechs[nm] = Json{{"type", "function"}, {"noise", m.noise}, {"outputs", m.outputs}};
          }
        },
        model.mechanism(i));
  }
  j["cardinalities"] = cards;
  j["mechanisms"] = mechs;
  return j;
}

// ---------------------------------------------------------------------------
// Distributions

/// {"vars": [...], "cards": [...], "probs": [...]} with the last variable
/// varying fastest.
inline JointDistribution distribution_from_json(const Json& j) {
  detail::check_keys(j, {"description", "vars", "cards", "probs"}, "distribution");
  return JointDistribution(
      detail::get<std::vector<std::string>>(detail::required(j, "vars", "distribution"), "distribution vars"),
      detail::get<std::vector<int>>(detail::required(j, "cards", "distribution"), "distribution cards"),
      detail::get<std::vector<double>>(detail::required(j, "probs", "distribution"), "distribution probs"));
}

inline Json distribution_to_json(const JointDistribution& d) {
  return Json{{"vars", d.names()}, {"cards", d.cardinalities()}, {"probs", d.probs()}};
}

/// A distribution file, or a model file whose exact joint table is used.
inline JointDistribution distribution_or_model_from_json(const Json& j) {
  if (j.is_object() && j.contains("probs")) return distribution_from_json(j);
  return model_distribution(model_from_json(j));
}

// ---------------------------------------------------------------------------
// Constraint systems

/// Key of a coordinate in constraint files: the term name, or the member
/// names joined by commas.
inline std::string coord_key(Coord c, const ConstraintSystem& sys) {
  if (c.is_aux()) return sys.aux_terms().at(static_cast<std::size_t>(c.aux_id())).name;
  std::string out;
  for (int i : c.as_subset().members()) {
    if (!out.empty()) out += ",";
    out += sys.names()[i];
  }
  return out;
}

inline Coord coord_from_key(const std::string& key, const ConstraintSystem& sys) {
  for (int a = 0; a < static_cast<int>(sys.aux_terms().size()); ++a)
    if (sys.aux_terms()[a].name == key) return Coord::aux(a);
  auto index = [&](const std::string& nm) {
    for (int i = 0; i < sys.n(); ++i)
      if (sys.names()[i] == nm) return i;
    return -1;
  };
  SubsetIndex s;
  for (const auto& part : detail::split(key, ',')) {
    if (const int i = index(part); i >= 0) {
      s = s.with(i);
      continue;
    }
    bool single = !part.empty();
    for (const auto& nm : sys.names()) single = single && nm.size() == 1;
    if (!single) throw InvalidArgument("unknown coordinate '" + key + "'");
    for (char ch : part) {
      const int i = index(std::string(1, ch));
      if (i < 0) throw InvalidArgument("unknown coordinate '" + key + "'");
      s = s.with(i);
    }
  }
  if (s.empty()) throw InvalidArgument("empty coordinate key");
  return Coord::subset(s);
}

inline Json expr_to_json(const LinearExpr& e, const ConstraintSystem& sys) {
  Json coeffs = Json::object();
  for (const auto& [c, k] : e.coeffs()) coeffs[coord_key(c, sys)] = rational_to_json(k);
  return Json{{"coeffs", coeffs}, {"const", rational_to_json(e.constant())}};
}

inline LinearExpr expr_from_json(const Json& j, const ConstraintSystem& sys, const std::string& what) {
  LinearExpr e;
  const Json& coeffs = detail::required(j, "coeffs", what);
  if (!coeffs.is_object()) throw InvalidArgument(what + " coeffs must be an object");
  for (const auto& [key, value] : coeffs.items()) e.add(coord_from_key(key, sys), rational_from_json(value, what));
  if (j.contains("const")) e += LinearExpr(rational_from_json(j.at("const"), what));
  return e;
}

/// {"variables": [...], "terms": [{"name", "definition"}], "constraints":
/// [{"kind": "ge"|"le"|"eq", "coeffs": {key: q}, "const": q, "label", "text"}]},
/// each constraint meaning coeffs·h + const (>=, <= or ==) 0. Output always
/// uses "ge" or "eq"; "text" is the rendered form and is ignored on input.
inline Json system_to_json(const ConstraintSystem& sys) {
  Json terms = Json::array();
  for (const auto& t : sys.aux_terms()) terms.push_back(Json{{"name", t.name}, {"definition", expr_to_json(t.definition, sys)}});
  Json cs = Json::array();
  auto emit = [&](const LinearConstraint& c) {
    Json jc = expr_to_json(c.expr(), sys);
    Json out{{"kind", c.is_equality() ? "eq" : "ge"}};
    out["coeffs"] = jc["coeffs"];
    out["const"] = jc["const"];
    if (!c.label().empty()) out["label"] = c.label();
    out["text"] = render(c, sys);
    cs.push_back(out);
  };
  for (const auto& c : sys.inequalities()) emit(c);
  for (const auto& c : sys.equalities()) emit(c);
  Json j{{"variables", sys.names()}};
  if (!terms.empty()) j["terms"] = terms;
  j["constraints"] = cs;
  return j;
}

inline ConstraintSystem system_from_json(const Json& j) {
  detail::check_keys(j, {"description", "variables", "terms", "constraints"}, "constraint file");
  const auto names =
      detail::get<std::vector<std::string>>(detail::required(j, "variables", "constraint file"), "variables");
  ConstraintSystem sys(static_cast<int>(names.size()), names);
  if (j.contains("terms")) {
    if (!j.at("terms").is_array()) throw InvalidArgument("terms must be an array");
    std::vector<AuxTerm> terms;
    for (const auto& t : j.at("terms")) {
      detail::check_keys(t, {"name", "definition"}, "term");
      AuxTerm a;
      a.name = detail::get<std::string>(detail::required(t, "name", "term"), "term name");
      if (a.name.empty()) throw InvalidArgument("term name is empty");
      for (const auto& other : terms)
        if (other.name == a.name) throw InvalidArgument("duplicate term name: " + a.name);
      if (t.contains("definition")) {
        detail::check_keys(t.at("definition"), {"coeffs", "const"}, "term definition");
        a.definition = expr_from_json(t.at("definition"), sys, "term " + a.name);
        if (a.definition.coeffs().empty() && sgn(a.definition.constant()) == 0)
          throw InvalidArgument("term " + a.name + " has an empty definition");
        for (const auto& [c, k] : a.definition.coeffs())
          if (c.is_aux()) throw InvalidArgument("term definitions cannot use other terms");
      }
      terms.push_back(std::move(a));
    }
    sys.set_aux_terms(std::move(terms));
  }
  const Json& cs = detail::required(j, "constraints", "constraint file");
  if (!cs.is_array()) throw InvalidArgument("constraints must be an array");
  for (const auto& c : cs) {
    detail::check_keys(c, {"kind", "coeffs", "const", "label", "text"}, "constraint");
    const std::string kind = c.contains("kind") ? detail::get<std::string>(c.at("kind"), "constraint kind") : "ge";
    const std::string label = c.contains("label") ? detail::get<std::string>(c.at("label"), "constraint label") : "";
    LinearExpr e = expr_from_json(c, sys, "constraint");
    if (kind == "ge") {
      sys.add(LinearConstraint::ge(std::move(e), label));
    } else if (kind == "le") {
      sys.add(LinearConstraint::le(std::move(e), label));
    } else if (kind == "eq") {
      sys.add(LinearConstraint::eq(std::move(e), label));
    } else {
      throw InvalidArgument("constraint kind must be ge, le or eq");
    }
  }
  return sys;
}

// ---------------------------------------------------------------------------
// Reports

inline Json report_to_json(const EliminationReport& r, const ConstraintSystem& sys, bool timings) {
  auto name = [&](Coord c) { return c.is_aux() ? sys.coord_name(c) : coord_key(c, sys); };
  Json order = Json::array();
  for (const auto& c : r.order) order.push_back(name(c));
  Json steps = Json::array();
  for (const auto& s : r.steps) {
    Json js{{"coordinate", name(s.coord)},
            {"before", s.before},
            {"generated", s.generated},
            {"after", s.after},
            {"lp_pruned", s.lp_pruned}};
    if (timings) js["seconds"] = s.seconds;
    steps.push_back(js);
  }
  Json j{{"order", order},
         {"substituted_equalities", r.substituted_equalities},
         {"input_inequalities", r.input_inequalities},
         {"steps", steps},
         {"final_before_pruning", r.final_before_pruning},
         {"output_inequalities", r.output_inequalities},
         {"output_equalities", r.output_equalities},
         {"big_integers", r.big_integers}};
  if (timings) j["total_seconds"] = r.total_seconds;
  return j;
}

inline Json evaluation_to_json(const EvaluationResult& r, const ConstraintSystem& sys) {
  Json rows = Json::array();
  std::size_t k = 0;
  auto emit = [&](const LinearConstraint& c) {
    rows.push_back(Json{{"constraint", render(c, sys)}, {"slack", r.slack[k]}, {"label", r.labels[k]}});
    ++k;
  };
  for (const auto& c : sys.inequalities()) emit(c);
  for (const auto& c : sys.equalities()) emit(c);
  return Json{{"verdict", to_string(r.verdict)}, {"worst_slack", r.worst_slack}, {"rows", rows}};
}

inline Json bound_to_json(const CausalStrengthBound& b) {
  return Json{{"source", b.source},     {"target", b.target},         {"bound", b.bound},
              {"vacuous", b.vacuous},   {"derivation", b.derivation}};
}

inline Json calibration_to_json(const CalibrationResult& r) {
  return Json{{"critical_value", r.critical_value}, {"standard_error", r.standard_error},
              {"level", r.level},                   {"runs", r.runs},
              {"rejection_rate", r.rejection_rate}, {"degenerate", r.degenerate}};
}

namespace detail {

/// Shortest decimal form that reads back to the same double.
inline std::string shortest(double x) {
  char buf[32];
  return std::string(buf, std::to_chars(buf, buf + sizeof buf, x).ptr);
}

}  // namespace detail

inline std::string calibration_to_csv(const CalibrationResult& r) {
  using detail::shortest;
  std::ostringstream os;
  os << "critical_value,standard_error,level,runs,rejection_rate,degenerate\n"
     << shortest(r.critical_value) << ',' << shortest(r.standard_error) << ',' << shortest(r.level) << ',' << r.runs
     << ',' << shortest(r.rejection_rate) << ',' << r.degenerate << '\n';
  return os.str();
}

inline Json power_to_json(const std::vector<PowerPoint>& curve, double critical_value) {
  Json pts = Json::array();
  for (const auto& p : curve)
    pts.push_back(Json{{"parameter", p.parameter}, {"power", p.power}, {"standard_error", p.standard_error}, {"runs", p.runs}});
  return Json{{"critical_value", critical_value}, {"points", pts}};
}

inline std::string power_to_csv(const std::vector<PowerPoint>& curve) {
  using detail::shortest;
  std::ostringstream os;
  os << "parameter,power,standard_error,runs\n";
  for (const auto& p : curve)
    os << shortest(p.parameter) << ',' << shortest(p.power) << ',' << shortest(p.standard_error) << ',' << p.runs
       << '\n';
  return os.str();
}

inline std::string sample_to_csv(const SampleTable& data, const Dag& dag, SubsetIndex columns) {
  std::ostringstream os;
  bool first = true;
  for (int i : columns.members()) {
    os << (first ? "" : ",") << dag.node(i).name;
    first = false;
  }
  os << '\n';
  for (std::size_t r = 0; r < data.rows(); ++r) {
    first = true;
    for (int i : columns.members()) {
      os << (first ? "" : ",") << data.at(r, i);
      first = false;
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace entrocone::io
