// cfx: generate, decide and audit counterfactual explanations from the shell.

#include <cstdio>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cfx/axioms.hpp"
#include "cfx/error.hpp"
#include "cfx/io.hpp"
#include "cfx/sat_explain.hpp"

namespace {

using cfx::io::Json;

struct Inputs {
  std::string query;
  std::string theory;
  std::string classifier;
  std::string instance;
};

struct Options {
  Inputs in;
  std::string kind;
  std::string distance = "hamming";
  double tau = cfx::kInfinity;
  std::size_t cap = 10000;
  std::string sat_backend = "builtin";
  bool count_calls = false;
  std::string format = "json";
  std::string explanation;
  std::string class_name;
  bool builtin = false;
  std::size_t budget = 5000;
  std::uint64_t seed = 20240601;
  unsigned jobs = 1;
  std::vector<std::string> explainers;
  std::vector<std::string> externals;
  std::vector<std::string> suite_queries;
  std::vector<std::string> witness_ids;
  bool compat = false;
};

/// Tags parse errors with the file they came from.
template <typename Fn>
auto from_file(const std::string& path, Fn&& fn) {
  try {
    return fn();
  } catch (const cfx::ParseError& e) {
    throw cfx::ParseError(path + ": " + e.what(), e.line(), e.column());
  }
}

cfx::Query load_query(const Inputs& in) {
  if (!in.query.empty()) {
    return from_file(in.query, [&] { return cfx::io::load_query(in.query); });
  }
  if (in.theory.empty() || in.classifier.empty() || in.instance.empty()) {
    throw cfx::Error(cfx::ErrorCode::InvalidArgument,
                     "give --query, or all of --theory, --classifier and --instance");
  }
  auto t = from_file(in.theory, [&] { return cfx::io::load_theory(in.theory); });
  auto k = from_file(in.classifier, [&] { return cfx::io::load_classifier(t, in.classifier); });
  auto x = from_file(in.instance, [&] {
    return cfx::io::instance_from_json(*t, cfx::io::parse_json(cfx::io::read_file(in.instance)));
  });
  return cfx::Query::create(std::move(k), std::move(x));
}

cfx::ExplainerKind parse_kind(const std::string& text) {
  auto kind = cfx::parse_kind(text);
  if (!kind) throw cfx::Error(cfx::ErrorCode::InvalidArgument, "unknown explainer kind " + text);
  return *kind;
}

cfx::DistanceMeasure parse_distance(const std::string& spec, const cfx::Theory& t) {
  if (spec == "hamming") return cfx::DistanceMeasure::hamming(t.num_features());
  constexpr std::string_view kWeighted = "weighted:";
  if (spec.rfind(kWeighted, 0) == 0) {
    const std::string path = spec.substr(kWeighted.size());
    return from_file(path, [&] {
      return cfx::io::weights_from_json(t, cfx::io::parse_json(cfx::io::read_file(path)));
    });
  }
  throw cfx::Error(cfx::ErrorCode::InvalidArgument,
                   "--distance takes hamming or weighted:<file>, not " + spec);
}

/// Inline JSON, or @path for a file.
cfx::PartialAssignment parse_explanation(const std::string& arg, const cfx::Theory& t) {
  if (!arg.empty() && arg[0] == '@') {
    const std::string path = arg.substr(1);
    return from_file(path, [&] {
      return cfx::io::assignment_from_json(t, cfx::io::parse_json(cfx::io::read_file(path)));
    });
  }
  return from_file("--explanation",
                   [&] { return cfx::io::assignment_from_json(t, cfx::io::parse_json(arg)); });
}

bool is_formula(const cfx::Query& q) {
  return q.classifier().kind() == cfx::Classifier::Kind::Formula && q.theory().is_boolean();
}

std::string render_set(const cfx::Theory& t, const cfx::ExplanationSet& s) {
  std::string out;
  for (const auto& e : s) out += cfx::braced(t, e) + "\n";
  if (s.empty()) out += "(none)\n";
  if (s.truncated()) out += "... truncated at " + std::to_string(s.size()) + "\n";
  return out;
}

std::string cmd_explain(const Options& o) {
  const cfx::Query q = load_query(o.in);
  const cfx::ExplainerKind kind = parse_kind(o.kind);
  const cfx::DistanceMeasure dd = parse_distance(o.distance, q.theory());
  const cfx::Cap cap = o.cap == 0 ? cfx::Cap() : cfx::Cap(o.cap);
  const cfx::ExplanationSet s = cfx::explain(kind, q, cap, &dd, o.tau);
  if (o.format == "text") {
    return std::string(cfx::to_string(kind)) + " for class " + q.theory().class_name(q.label()) +
           ":\n" + render_set(q.theory(), s);
  }
  return cfx::io::dump(cfx::io::explanations_to_json(q.theory(), s));
}

std::string cmd_decide(const Options& o) {
  const cfx::Query q = load_query(o.in);
  const cfx::ExplainerKind kind = parse_kind(o.kind);
  const cfx::DistanceMeasure dd = parse_distance(o.distance, q.theory());
  const cfx::PartialAssignment e = parse_explanation(o.explanation, q.theory());
  if (!e.valid_for(q.theory())) {
    throw cfx::Error(cfx::ErrorCode::TheoryMismatch, "explanation is not over the theory");
  }
  bool member = false;
  std::optional<std::size_t> calls;
  std::string method;
  if (is_formula(q)) {
    auto oracle = cfx::sat::SatOracle::from_spec(o.sat_backend);
    member = cfx::decide_exp(kind, q, e, oracle, &dd, o.tau);
    calls = oracle.calls();
    method = "sat:" + oracle.backend_name();
  } else {
    member = cfx::is_member_derived(kind, q, e, &dd, o.tau);
    method = "enumeration";
  }
  if (o.format == "text") {
    std::string out = cfx::braced(q.theory(), e) + " is " + (member ? "" : "not ") +
                      "a " + std::string(cfx::to_string(kind)) + " explanation\n";
    if (o.count_calls && calls) out += "oracle calls: " + std::to_string(*calls) + "\n";
    return out;
  }
  Json j = {{"kind", std::string(cfx::to_string(kind))},
            {"explanation", cfx::io::assignment_to_json(q.theory(), e)},
            {"member", member},
            {"method", method}};
  if (o.count_calls) j["oracle_calls"] = calls ? Json(*calls) : Json(0);
  return cfx::io::dump(j);
}

std::string cmd_find(const Options& o) {
  const cfx::Query q = load_query(o.in);
  const cfx::ExplainerKind kind = parse_kind(o.kind);
  const cfx::DistanceMeasure dd = parse_distance(o.distance, q.theory());
  std::optional<cfx::PartialAssignment> found;
  std::optional<std::size_t> calls;
  std::string method;
  if (is_formula(q)) {
    auto oracle = cfx::sat::SatOracle::from_spec(o.sat_backend);
    found = cfx::find_exp(kind, q, oracle, &dd, o.tau);
    calls = oracle.calls();
    method = "sat:" + oracle.backend_name();
  } else {
    const cfx::ExplanationSet s = cfx::explain(kind, q, std::size_t{1}, &dd, o.tau);
    if (!s.empty()) found = s.items().front();
    method = "enumeration";
  }
  if (o.format == "text") {
    std::string out = found ? cfx::braced(q.theory(), *found) + "\n"
                            : "no " + std::string(cfx::to_string(kind)) + " explanation\n";
    if (o.count_calls && calls) out += "oracle calls: " + std::to_string(*calls) + "\n";
    return out;
  }
  Json j = {{"kind", std::string(cfx::to_string(kind))},
            {"found", found.has_value()},
            {"explanation", found ? cfx::io::assignment_to_json(q.theory(), *found) : Json()},
            {"method", method}};
  if (o.count_calls) j["oracle_calls"] = calls ? Json(*calls) : Json(0);
  return cfx::io::dump(j);
}

std::string cmd_core(const Options& o) {
  cfx::TheoryPtr t;
  std::optional<cfx::Classifier> k;
  if (!o.in.query.empty()) {
    const cfx::Query q = load_query(o.in);
    t = q.classifier().theory_ptr();
    k = q.classifier();
  } else {
    if (o.in.theory.empty() || o.in.classifier.empty()) {
      throw cfx::Error(cfx::ErrorCode::InvalidArgument,
                       "give --query, or --theory and --classifier");
    }
    t = from_file(o.in.theory, [&] { return cfx::io::load_theory(o.in.theory); });
    k = from_file(o.in.classifier, [&] { return cfx::io::load_classifier(t, o.in.classifier); });
  }
  std::vector<cfx::ClassId> classes;
  if (!o.class_name.empty()) {
    classes.push_back(t->class_id(o.class_name));
  } else {
    for (cfx::ClassId c = 0; c < t->num_classes(); ++c) classes.push_back(c);
  }
  Json cores = Json::object();
  std::string text;
  for (cfx::ClassId c : classes) {
    const auto core = cfx::core_literals(*k, c);
    cores[t->class_name(c)] = cfx::io::assignment_to_json(*t, core);
    text += "Core(" + t->class_name(c) + ") = " + cfx::braced(*t, core) + "\n";
  }
  if (o.format == "text") return text;
  return cfx::io::dump({{"cores", std::move(cores)}});
}

std::vector<cfx::ExplainerUnderTest> audit_explainers(
    const Options& o, std::vector<std::shared_ptr<cfx::io::ExternalExplainer>>& keep) {
  std::vector<std::string> names = o.explainers;
  if (names.empty() && o.externals.empty()) {
    names = {"gNec", "sNec", "gSuf", "sSuf", "cSuf", "L0", "L1", "L2", "Lwf", "Lc", "Ld"};
  }
  std::vector<cfx::ExplainerUnderTest> out;
  for (const std::string& n : names) {
    if (n == "L0") {
      out.push_back(cfx::constant_empty());
    } else if (n == "L1") {
      out.push_back(cfx::constant_trivial());
    } else if (n == "L2") {
      out.push_back(cfx::old_values());
    } else {
      out.push_back(cfx::builtin_explainer(parse_kind(n), o.tau));
    }
  }
  for (const std::string& cmd : o.externals) {
    keep.push_back(std::make_shared<cfx::io::ExternalExplainer>(cmd));
    out.push_back(cfx::io::external_explainer(keep.back()));
  }
  return out;
}

std::string mark(bool satisfied) { return satisfied ? "ok" : "x"; }

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

std::string cmd_audit(const Options& o, bool& mismatch) {
  cfx::QuerySuite suite;
  if (o.builtin) suite = cfx::builtin_suite({o.budget, o.seed});
  for (const std::string& path : o.suite_queries) {
    suite.add(from_file(path, [&] { return cfx::io::load_query(path); }), path);
  }
  if (suite.size() == 0) {
    throw cfx::Error(cfx::ErrorCode::InvalidArgument, "audit needs --builtin or --suite files");
  }
  if (!o.builtin) suite.set_descriptor("user suite of " + std::to_string(suite.size()) + " queries");

  std::vector<std::shared_ptr<cfx::io::ExternalExplainer>> keep;
  const auto explainers = audit_explainers(o, keep);

  Json profiles = Json::array();
  Json families = Json::object();
  std::string table = pad("axiom", 20);
  std::vector<cfx::AxiomProfile> results;
  for (const auto& l : explainers) {
    const auto outputs = cfx::run_explainer(l, suite, o.jobs);
    results.push_back(cfx::audit(l, suite, outputs, cfx::expected_profile(l.name)));
    const cfx::AxiomProfile& p = results.back();
    if (!p.mismatches.empty()) mismatch = true;
    profiles.push_back(cfx::io::profile_to_json(p, suite));
    table += pad(l.name, 8);

    const cfx::FamilyReport fr = cfx::classify_family(l, suite, o.jobs);
    Json incl = Json::object();
    Json ax = Json::object();
    for (cfx::Family f : cfx::kAllFamilies) {
      incl[std::string(cfx::to_string(f))] = fr.by_inclusion[static_cast<std::size_t>(f)];
      ax[std::string(cfx::to_string(f))] = fr.by_axioms[static_cast<std::size_t>(f)];
    }
    families[l.name] = {{"by_inclusion", std::move(incl)},
                        {"by_axioms", std::move(ax)},
                        {"consistent", fr.consistent()}};
  }

  if (o.format == "text") {
    table += "\n";
    for (cfx::AxiomId a : cfx::kAllAxioms) {
      table += pad(std::string(cfx::to_string(a)), 20);
      for (const auto& p : results) {
        std::string cell = mark(p.satisfied(a));
        if (std::find(p.mismatches.begin(), p.mismatches.end(), a) != p.mismatches.end()) {
          cell += "!";
        }
        table += pad(cell, 8);
      }
      table += "\n";
    }
    table += "suite: " + suite.descriptor() + " (" + std::to_string(suite.size()) + " queries)\n";
    table += "ok = no violation found, x = violated, ! = differs from the expected row\n";
    for (const auto& p : results) {
      for (cfx::AxiomId a : cfx::kAllAxioms) {
        const auto& v = p.verdicts[static_cast<std::size_t>(a)];
        if (!v.counterexample) continue;
        const auto& cx = *v.counterexample;
        const cfx::Theory& t = suite.query(cx.query).theory();
        table += p.explainer + " / " + std::string(cfx::to_string(a)) + ": " +
                 suite.label(cx.query);
        if (cx.other_query) table += " vs " + suite.label(*cx.other_query);
        if (cx.explanation) table += ", E = " + cfx::braced(t, *cx.explanation);
        if (cx.witness) table += ", y = " + cfx::braced(t, *cx.witness);
        table += ": " + cx.detail + "\n";
      }
    }
    return table;
  }

  Json suite_json = {{"descriptor", suite.descriptor()}, {"size", suite.size()}};
  if (o.builtin) {
    suite_json["budget"] = o.budget;
    suite_json["seed"] = o.seed;
  }
  return cfx::io::dump({{"schema", 1},
                        {"suite", std::move(suite_json)},
                        {"profiles", std::move(profiles)},
                        {"families", std::move(families)},
                        {"mismatch", mismatch}});
}

std::string cmd_witness(const Options& o, bool& failed) {
  std::vector<int> ids;
  for (const std::string& s : o.witness_ids) {
    std::string digits = s;
    if (!digits.empty() && (digits[0] == 'I' || digits[0] == 'i')) digits = digits.substr(1);
    int id = 0;
    try {
      id = std::stoi(digits);
    } catch (const std::exception&) {
      id = 0;
    }
    if (id < 1 || id > 7) {
      throw cfx::Error(cfx::ErrorCode::InvalidArgument, "witness ids are I1..I7, not " + s);
    }
    ids.push_back(id);
  }
  if (ids.empty() && !o.compat) ids = {1, 2, 3, 4, 5, 6, 7};

  Json impossible = Json::array();
  std::string text;
  for (int id : ids) {
    const cfx::ImpossibilityWitness w = cfx::impossibility_witness(id);
    if (!w.conflict_verified) failed = true;
    Json axioms = Json::array();
    std::string axiom_text;
    for (cfx::AxiomId a : w.axioms) {
      axioms.push_back(std::string(cfx::to_string(a)));
      axiom_text += (axiom_text.empty() ? "" : ", ") + std::string(cfx::to_string(a));
    }
    Json queries = Json::array();
    for (std::size_t i = 0; i < w.suite.size(); ++i) {
      queries.push_back({{"label", w.suite.label(i)},
                         {"query", cfx::io::query_to_json(w.suite.query(i))}});
    }
    impossible.push_back({{"id", w.id},
                          {"axioms", std::move(axioms)},
                          {"queries", std::move(queries)},
                          {"conflict_verified", w.conflict_verified},
                          {"trace", w.trace}});
    text += w.id + " {" + axiom_text + "}: " +
            (w.conflict_verified ? "conflict verified" : "NOT verified") + "\n";
    for (const auto& line : w.trace) text += "  " + line + "\n";
  }

  Json compatible = Json::array();
  if (o.compat) {
    const cfx::QuerySuite suite = cfx::builtin_suite({o.budget, o.seed});
    for (const auto& c : cfx::compatibility_witnesses(suite, o.jobs)) {
      if (!c.confirmed) failed = true;
      Json claimed = Json::array();
      Json observed = Json::array();
      for (cfx::AxiomId a : c.claimed) claimed.push_back(std::string(cfx::to_string(a)));
      for (cfx::AxiomId a : cfx::kAllAxioms) {
        if (c.profile.satisfied(a)) observed.push_back(std::string(cfx::to_string(a)));
      }
      text += c.profile.explainer + ": " + (c.confirmed ? "confirmed" : "NOT confirmed") + " {";
      for (std::size_t i = 0; i < c.claimed.size(); ++i) {
        text += (i ? ", " : "") + std::string(cfx::to_string(c.claimed[i]));
      }
      text += "}\n";
      compatible.push_back({{"explainer", c.profile.explainer},
                            {"claimed", std::move(claimed)},
                            {"no_violation_found", std::move(observed)},
                            {"confirmed", c.confirmed}});
    }
  }
  if (o.format == "text") return text;
  Json j = {{"impossibility", std::move(impossible)}};
  if (o.compat) j["compatibility"] = std::move(compatible);
  return cfx::io::dump(j);
}

void add_query_inputs(CLI::App* cmd, Options& o) {
  cmd->add_option("--query", o.in.query, "Query JSON {theory, classifier, instance}");
  cmd->add_option("--theory", o.in.theory, "Theory JSON");
  cmd->add_option("--classifier", o.in.classifier, "Table CSV, formula file or classifier JSON");
  cmd->add_option("--instance", o.in.instance, "Instance JSON");
}

void add_format(CLI::App* cmd, Options& o) {
  cmd->add_option("--format", o.format, "Output format")
      ->check(CLI::IsMember({"json", "text"}));
}

void add_explainer_params(CLI::App* cmd, Options& o, bool kind_required) {
  auto* kind = cmd->add_option("--kind", o.kind, "gNec, sNec, gSuf, sSuf, cSuf, Lwf, Lc, Ld, LdTau");
  if (kind_required) kind->required();
  cmd->add_option("--distance", o.distance, "hamming or weighted:<file>");
  cmd->add_option("--tau", o.tau, "Distance bound for LdTau");
}

void add_sat(CLI::App* cmd, Options& o) {
  cmd->add_option("--sat-backend", o.sat_backend, "builtin or exec:<path>");
  cmd->add_flag("--count-oracle-calls", o.count_calls, "Report the number of oracle calls");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Counterfactual explanations over finite feature spaces", "cfx"};
  app.require_subcommand(1);
  Options o;

  auto* explain = app.add_subcommand("explain", "List the explanations of one kind");
  add_query_inputs(explain, o);
  add_explainer_params(explain, o, true);
  explain->add_option("--cap", o.cap, "Maximum explanations listed, 0 for no limit");
  add_format(explain, o);

  auto* decide = app.add_subcommand("decide", "Decide whether an assignment is an explanation");
  add_query_inputs(decide, o);
  add_explainer_params(decide, o, true);
  decide->add_option("--explanation", o.explanation, "Assignment JSON, or @file")->required();
  add_sat(decide, o);
  add_format(decide, o);

  auto* find = app.add_subcommand("find", "Produce one explanation, or report none");
  add_query_inputs(find, o);
  add_explainer_params(find, o, true);
  add_sat(find, o);
  add_format(find, o);

  auto* core = app.add_subcommand("core", "Core literals of each class");
  add_query_inputs(core, o);
  core->add_option("--class", o.class_name, "Only this class");
  add_format(core, o);

  auto* audit = app.add_subcommand("audit", "Check the nine axioms over a query suite");
  audit->add_flag("--builtin", o.builtin, "Use the built-in suite");
  audit->add_option("--suite", o.suite_queries, "Query JSON files to audit on");
  audit->add_option("--explainer", o.explainers, "Explainers to audit (kinds, L0, L1, L2)")
      ->delimiter(',');
  audit->add_option("--external", o.externals, "Command speaking the line-delimited protocol");
  audit->add_option("--budget", o.budget, "Classifier budget for the exhaustive suite");
  audit->add_option("--seed", o.seed, "Sampling seed for the exhaustive suite");
  audit->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber);
  audit->add_option("--tau", o.tau, "Distance bound for LdTau");
  add_format(audit, o);

  auto* witness = app.add_subcommand("witness", "Verify the impossibility and compatibility witnesses");
  witness->add_option("--id", o.witness_ids, "I1..I7; all when omitted")->delimiter(',');
  witness->add_flag("--compat", o.compat, "Also audit the compatibility witnesses");
  witness->add_option("--budget", o.budget, "Classifier budget for the exhaustive suite");
  witness->add_option("--seed", o.seed, "Sampling seed for the exhaustive suite");
  witness->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber);
  add_format(witness, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    std::string out;
    int code = 0;
    if (explain->parsed()) {
      out = cmd_explain(o);
    } else if (decide->parsed()) {
      out = cmd_decide(o);
    } else if (find->parsed()) {
      out = cmd_find(o);
    } else if (core->parsed()) {
      out = cmd_core(o);
    } else if (audit->parsed()) {
      bool mismatch = false;
      out = cmd_audit(o, mismatch);
      if (mismatch) code = 2;
    } else if (witness->parsed()) {
      bool failed = false;
      out = cmd_witness(o, failed);
      if (failed) code = 2;
    }
    std::fwrite(out.data(), 1, out.size(), stdout);
    return code;
  } catch (const cfx::ParseError& e) {
    std::cerr << "cfx: parse error";
    if (e.line() > 0) std::cerr << " at line " << e.line() << ", column " << e.column();
    std::cerr << ": " << e.what() << "\n";
    return 1;
  } catch (const cfx::Error& e) {
    std::cerr << "cfx: " << cfx::to_string(e.code()) << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "cfx: " << e.what() << "\n";
    return 1;
  }
}
