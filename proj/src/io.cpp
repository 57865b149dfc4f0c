#include "cfx/io.hpp"

#include <algorithm>
#include <cerrno>
#include <csignal>
#include <cstring>
#include <fstream>
#include <sstream>

#include <fcntl.h>
#include <sys/wait.h>
#include <unistd.h>

#include "cfx/error.hpp"

namespace cfx::io {

namespace {

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t offset) {
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

[[noreturn]] void shape_error(const std::string& what) {
  throw ParseError(what);
}

const Json& member(const Json& j, const char* key, const char* where) {
  if (!j.is_object() || !j.contains(key)) {
    shape_error(std::string(where) + ": missing \"" + key + "\"");
  }
  return j.at(key);
}

std::string as_string(const Json& j, const std::string& where) {
  if (!j.is_string()) shape_error(where + ": expected a string");
  return j.get<std::string>();
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

/// One CSV record split on commas; double quotes may wrap a field.
std::vector<std::string> split_csv(std::string_view line, std::size_t line_no) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += ch;
      }
    } else if (ch == '"') {
      if (!trim(field).empty()) throw ParseError("stray quote", line_no, i + 1);
      field.clear();
      quoted = true;
      was_quoted = true;
    } else if (ch == ',') {
      out.push_back(was_quoted ? field : trim(field));
      field.clear();
      was_quoted = false;
    } else {
      field += ch;
    }
  }
  if (quoted) throw ParseError("unterminated quote", line_no, line.size() + 1);
  out.push_back(was_quoted ? field : trim(field));
  return out;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) {
      lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return lines;
}

bool meaningful(std::string_view line) {
  const std::string t = trim(line);
  return !t.empty() && t[0] != '#';
}

std::string extension_of(const std::filesystem::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

}  // namespace

Json parse_json(std::string_view text) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    const std::size_t offset = e.byte > 0 ? e.byte - 1 : 0;
    const auto [line, column] = line_column(text, offset);
    std::string what = e.what();
    // Keep the parser's diagnosis, drop its byte-offset preamble.
    if (const auto pos = what.find(": "); pos != std::string::npos) what = what.substr(pos + 2);
    throw ParseError("invalid JSON: " + what, line, column);
  }
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// --- Theory and assignments ----------------------------------------------------

Theory theory_from_json(const Json& j) {
  const Json& features = member(j, "features", "theory");
  const Json& classes = member(j, "classes", "theory");
  if (!features.is_array()) shape_error("theory: \"features\" must be an array");
  if (!classes.is_array()) shape_error("theory: \"classes\" must be an array");
  std::vector<Feature> fs;
  for (const Json& f : features) {
    Feature feature;
    feature.name = as_string(member(f, "name", "feature"), "feature name");
    const Json& domain = member(f, "domain", "feature");
    if (!domain.is_array()) shape_error("feature " + feature.name + ": domain must be an array");
    for (const Json& v : domain) feature.domain.push_back(as_string(v, "feature " + feature.name));
    fs.push_back(std::move(feature));
  }
  std::vector<std::string> cs;
  for (const Json& c : classes) cs.push_back(as_string(c, "class"));
  return Theory::create(std::move(fs), std::move(cs));
}

Json theory_to_json(const Theory& t) {
  Json features = Json::array();
  for (const Feature& f : t.features()) features.push_back({{"name", f.name}, {"domain", f.domain}});
  return {{"features", std::move(features)}, {"classes", t.classes()}};
}

TheoryPtr load_theory(const std::filesystem::path& path) {
  return std::make_shared<const Theory>(theory_from_json(parse_json(read_file(path))));
}

PartialAssignment assignment_from_json(const Theory& t, const Json& j) {
  if (!j.is_object()) shape_error("assignment: expected an object of feature: value");
  PartialAssignment e(t.num_features());
  for (const auto& [name, value] : j.items()) {
    const FeatureId f = t.feature_id(name);
    e.set(f, t.value_id(f, as_string(value, "feature " + name)));
  }
  return e;
}

Instance instance_from_json(const Theory& t, const Json& j) {
  PartialAssignment e = assignment_from_json(t, j);
  for (FeatureId f = 0; f < t.num_features(); ++f) {
    if (!e.has(f)) {
      throw Error(ErrorCode::TheoryMismatch, "instance leaves feature " + t.feature(f).name +
                                                  " unassigned");
    }
  }
  return Instance(std::move(e));
}

Json assignment_to_json(const Theory& t, const PartialAssignment& e) {
  Json j = Json::object();
  for (const Literal& l : e.literals()) j[t.feature(l.feature).name] = t.value_name(l.feature, l.value);
  return j;
}

Json explanations_to_json(const Theory& t, const ExplanationSet& s) {
  Json list = Json::array();
  for (const auto& e : s) list.push_back(assignment_to_json(t, e));
  return {{"kind", s.kind()},
          {"count", s.size()},
          {"truncated", s.truncated()},
          {"explanations", std::move(list)}};
}

ExplanationSet explanations_from_json(const Theory& t, const Json& j) {
  const Json& list = member(j, "explanations", "explanation set");
  if (!list.is_array()) shape_error("explanation set: \"explanations\" must be an array");
  std::vector<PartialAssignment> items;
  for (const Json& e : list) items.push_back(assignment_from_json(t, e));
  if (j.contains("count") && (!j["count"].is_number_unsigned() ||
                              j["count"].get<std::size_t>() != items.size())) {
    shape_error("explanation set: \"count\" does not match the list");
  }
  const std::string kind = j.contains("kind") ? as_string(j["kind"], "kind") : std::string();
  bool truncated = false;
  if (j.contains("truncated")) {
    if (!j["truncated"].is_boolean()) shape_error("explanation set: \"truncated\" must be boolean");
    truncated = j["truncated"].get<bool>();
  }
  return ExplanationSet(kind, std::move(items), truncated);
}

// --- Classifiers -------------------------------------------------------------------

Classifier table_from_csv(TheoryPtr t, std::string_view text) {
  const auto lines = split_lines(text);
  std::size_t i = 0;
  while (i < lines.size() && !meaningful(lines[i])) ++i;
  if (i == lines.size()) throw ParseError("empty table", 1, 1);
  const std::size_t header_line = i + 1;
  const auto header = split_csv(lines[i], header_line);
  const std::size_t n = t->num_features();
  if (header.size() != n + 1 || header.back() != "class") {
    throw ParseError("header must list the " + std::to_string(n) +
                         " feature names in theory order, then class",
                     header_line, 1);
  }
  for (FeatureId f = 0; f < n; ++f) {
    if (header[f] != t->feature(f).name) {
      throw ParseError("column " + std::to_string(f + 1) + " should be feature " +
                           t->feature(f).name + ", found " + header[f],
                       header_line, 1);
    }
  }
  const std::uint64_t count = t->instance_count();
  if (count > kMaxTabulatedInstances) {
    throw Error(ErrorCode::InvalidArgument, "theory too large for a table classifier");
  }
  constexpr ClassId kUnset = static_cast<ClassId>(-1);
  std::vector<ClassId> labels(count, kUnset);
  for (++i; i < lines.size(); ++i) {
    if (!meaningful(lines[i])) continue;
    const std::size_t line_no = i + 1;
    const auto cells = split_csv(lines[i], line_no);
    if (cells.size() != n + 1) {
      throw ParseError("expected " + std::to_string(n + 1) + " cells, found " +
                           std::to_string(cells.size()),
                       line_no, 1);
    }
    std::vector<ValueId> values(n);
    for (FeatureId f = 0; f < n; ++f) {
      const auto v = t->find_value(f, cells[f]);
      if (!v) {
        throw ParseError("unknown value " + cells[f] + " for feature " + t->feature(f).name,
                         line_no, 1);
      }
      values[f] = *v;
    }
    const auto c = t->find_class(cells[n]);
    if (!c) throw ParseError("unknown class " + cells[n], line_no, 1);
    const std::uint64_t r = instance_rank(*t, Instance::from_values(values));
    if (labels[r] != kUnset) {
      throw Error(ErrorCode::IncompleteTable,
                  "row on line " + std::to_string(line_no) + " repeats an earlier instance");
    }
    labels[r] = *c;
  }
  for (std::uint64_t r = 0; r < count; ++r) {
    if (labels[r] == kUnset) {
      throw Error(ErrorCode::IncompleteTable,
                  "no row for instance " + braced(*t, instance_at(*t, r)));
    }
  }
  return Classifier::table(std::move(t), std::move(labels));
}

std::string table_to_csv(const Classifier& k) {
  const Theory& t = k.theory();
  auto cell = [](const std::string& s) {
    if (s.find_first_of(",\"") == std::string::npos && s == trim(s)) return s;
    std::string out = "\"";
    for (char ch : s) out += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return out + "\"";
  };
  std::string out;
  for (const Feature& f : t.features()) out += cell(f.name) + ",";
  out += "class\n";
  const auto& labels = k.labels();
  std::uint64_t r = 0;
  for (const PartialAssignment& y : enumerate_instances(t)) {
    for (const Literal& l : y.literals()) out += cell(t.value_name(l.feature, l.value)) + ",";
    out += cell(t.class_name(labels[r++])) + "\n";
  }
  return out;
}

Classifier formula_from_text(TheoryPtr t, std::string_view text) {
  const auto lines = split_lines(text);
  std::size_t i = 0;
  while (i < lines.size() && !meaningful(lines[i])) ++i;
  if (i == lines.size()) throw ParseError("empty formula file", 1, 1);
  const std::string head = trim(lines[i]);
  const std::size_t head_line = i + 1;
  constexpr std::string_view kPrefix = "classes:";
  if (head.rfind(kPrefix, 0) != 0) {
    throw ParseError("first line must be `classes: <true-class>,<false-class>`", head_line, 1);
  }
  const auto names = split_csv(std::string_view(head).substr(kPrefix.size()), head_line);
  if (names.size() != 2) throw ParseError("expected exactly two classes", head_line, 1);
  const auto if_true = t->find_class(names[0]);
  const auto if_false = t->find_class(names[1]);
  if (!if_true) throw Error(ErrorCode::UnknownClass, "unknown class " + names[0]);
  if (!if_false) throw Error(ErrorCode::UnknownClass, "unknown class " + names[1]);

  ++i;
  while (i < lines.size() && !meaningful(lines[i])) ++i;
  if (i == lines.size()) throw ParseError("missing formula", head_line + 1, 1);
  const std::size_t formula_line = i + 1;
  // Trailing blank lines are dropped so that an unexpected end of input is
  // reported on the last line of the formula.
  std::size_t last = lines.size();
  while (last > i && !meaningful(lines[last - 1])) --last;
  std::string body;
  for (std::size_t k = i; k < last; ++k) {
    if (k > i) body += "\n";
    if (trim(lines[k]).rfind('#', 0) != 0) body += std::string(lines[k]);
  }
  if (!t->is_boolean()) {
    throw Error(ErrorCode::NotBoolean, "formula classifiers need two values per feature");
  }
  try {
    PropFormula phi = parse_formula(body, *t);
    return Classifier::formula(std::move(t), std::move(phi), *if_true, *if_false);
  } catch (const ParseError& e) {
    throw ParseError(e.what(), e.line() == 0 ? 0 : e.line() + formula_line - 1, e.column());
  }
}

std::string formula_to_text(const Classifier& k) {
  const Theory& t = k.theory();
  return "classes: " + t.class_name(k.true_class()) + "," + t.class_name(k.false_class()) + "\n" +
         k.formula().to_string(t) + "\n";
}

Classifier classifier_from_json(TheoryPtr t, const Json& j) {
  const std::string type = as_string(member(j, "type", "classifier"), "classifier type");
  if (type == "formula") {
    const std::string text = as_string(member(j, "formula", "classifier"), "formula");
    const Json& classes = member(j, "classes", "classifier");
    if (!classes.is_array() || classes.size() != 2) {
      shape_error("classifier: \"classes\" must list the true class then the false class");
    }
    const ClassId if_true = t->class_id(as_string(classes[0], "class"));
    const ClassId if_false = t->class_id(as_string(classes[1], "class"));
    if (!t->is_boolean()) {
      throw Error(ErrorCode::NotBoolean, "formula classifiers need two values per feature");
    }
    PropFormula phi = parse_formula(text, *t);
    return Classifier::formula(std::move(t), std::move(phi), if_true, if_false);
  }
  if (type != "table") shape_error("classifier: type must be \"table\" or \"formula\"");
  const Json& rows = member(j, "rows", "classifier");
  if (!rows.is_array()) shape_error("classifier: \"rows\" must be an array");
  const std::uint64_t count = t->instance_count();
  if (count > kMaxTabulatedInstances) {
    throw Error(ErrorCode::InvalidArgument, "theory too large for a table classifier");
  }
  constexpr ClassId kUnset = static_cast<ClassId>(-1);
  std::vector<ClassId> labels(count, kUnset);
  for (const Json& row : rows) {
    const Instance y = instance_from_json(*t, member(row, "instance", "table row"));
    const ClassId c = t->class_id(as_string(member(row, "class", "table row"), "class"));
    const std::uint64_t r = instance_rank(*t, y);
    if (labels[r] != kUnset) {
      throw Error(ErrorCode::IncompleteTable, "instance " + braced(*t, y) + " appears twice");
    }
    labels[r] = c;
  }
  for (std::uint64_t r = 0; r < count; ++r) {
    if (labels[r] == kUnset) {
      throw Error(ErrorCode::IncompleteTable,
                  "no row for instance " + braced(*t, instance_at(*t, r)));
    }
  }
  return Classifier::table(std::move(t), std::move(labels));
}

Json classifier_to_json(const Classifier& k) {
  const Theory& t = k.theory();
  if (k.kind() == Classifier::Kind::Formula) {
    return {{"type", "formula"},
            {"formula", k.formula().to_string(t)},
            {"classes", {t.class_name(k.true_class()), t.class_name(k.false_class())}}};
  }
  Json rows = Json::array();
  const auto& labels = k.labels();
  std::uint64_t r = 0;
  for (const PartialAssignment& y : enumerate_instances(t)) {
    rows.push_back({{"instance", assignment_to_json(t, y)}, {"class", t.class_name(labels[r++])}});
  }
  return {{"type", "table"}, {"rows", std::move(rows)}};
}

Classifier load_classifier(TheoryPtr t, const std::filesystem::path& path) {
  const std::string text = read_file(path);
  const std::string ext = extension_of(path);
  if (ext == ".csv") return table_from_csv(std::move(t), text);
  if (ext == ".json") return classifier_from_json(std::move(t), parse_json(text));
  for (std::string_view line : split_lines(text)) {
    if (!meaningful(line)) continue;
    if (trim(line).rfind("classes:", 0) == 0) return formula_from_text(std::move(t), text);
    break;
  }
  return table_from_csv(std::move(t), text);
}

// --- Queries -----------------------------------------------------------------------

Json query_to_json(const Query& q) {
  return {{"theory", theory_to_json(q.theory())},
          {"classifier", classifier_to_json(q.classifier())},
          {"instance", assignment_to_json(q.theory(), q.instance())}};
}

Query query_from_json(const Json& j) {
  auto t = std::make_shared<const Theory>(theory_from_json(member(j, "theory", "query")));
  Classifier k = classifier_from_json(t, member(j, "classifier", "query"));
  Instance x = instance_from_json(*t, member(j, "instance", "query"));
  return Query::create(std::move(k), std::move(x));
}

Query load_query(const std::filesystem::path& path) {
  return query_from_json(parse_json(read_file(path)));
}

Query ingest(const std::filesystem::path& theory, const std::filesystem::path& classifier,
             const std::filesystem::path& instance) {
  TheoryPtr t = load_theory(theory);
  Classifier k = load_classifier(t, classifier);
  Instance x = instance_from_json(*t, parse_json(read_file(instance)));
  return Query::create(std::move(k), std::move(x));
}

DistanceMeasure weights_from_json(const Theory& t, const Json& j) {
  if (!j.is_object()) shape_error("weights: expected an object of feature: number");
  std::vector<double> w(t.num_features(), 1.0);
  for (const auto& [name, value] : j.items()) {
    if (!value.is_number()) shape_error("weights: " + name + " must be a number");
    w[t.feature_id(name)] = value.get<double>();
  }
  return DistanceMeasure::weighted(std::move(w));
}

// --- Audit reports -----------------------------------------------------------------

Json counterexample_to_json(const Counterexample& cx, const QuerySuite& suite) {
  const Theory& t = suite.query(cx.query).theory();
  Json j = {{"query_label", suite.label(cx.query)}, {"detail", cx.detail}};
  Json queries = Json::array({query_to_json(suite.query(cx.query))});
  if (cx.other_query) {
    j["other_query_label"] = suite.label(*cx.other_query);
    queries.push_back(query_to_json(suite.query(*cx.other_query)));
  }
  j["queries"] = std::move(queries);
  if (cx.explanation) j["explanation"] = assignment_to_json(t, *cx.explanation);
  if (cx.witness) j["witness"] = assignment_to_json(t, *cx.witness);
  return j;
}

QuerySuite counterexample_suite(const Json& cx) {
  const Json& queries = member(cx, "queries", "counterexample");
  if (!queries.is_array() || queries.empty()) shape_error("counterexample: no queries");
  QuerySuite s("replay");
  std::size_t i = 0;
  for (const Json& q : queries) s.add(query_from_json(q), "replay/" + std::to_string(i++));
  return s;
}

Json profile_to_json(const AxiomProfile& p, const QuerySuite& suite) {
  Json verdicts = Json::object();
  for (AxiomId a : kAllAxioms) {
    const Verdict& v = p.verdicts[static_cast<std::size_t>(a)];
    Json entry = {{"status", v.violated() ? "violated" : "no-violation-found"}};
    if (v.counterexample) entry["counterexample"] = counterexample_to_json(*v.counterexample, suite);
    verdicts[std::string(to_string(a))] = std::move(entry);
  }
  Json j = {{"explainer", p.explainer}, {"suite", p.suite}, {"verdicts", std::move(verdicts)}};
  if (p.expected) {
    Json expected = Json::object();
    for (AxiomId a : kAllAxioms) {
      expected[std::string(to_string(a))] = (*p.expected)[static_cast<std::size_t>(a)];
    }
    j["expected"] = std::move(expected);
  } else {
    j["expected"] = nullptr;
  }
  Json mismatches = Json::array();
  for (AxiomId a : p.mismatches) mismatches.push_back(std::string(to_string(a)));
  j["mismatches"] = std::move(mismatches);
  Json broken = Json::array();
  for (const Implication& imp : broken_implications(p)) {
    Json lhs = Json::array();
    for (AxiomId a : imp.antecedents) lhs.push_back(std::string(to_string(a)));
    broken.push_back({{"antecedents", std::move(lhs)},
                      {"consequent", std::string(to_string(imp.consequent))}});
  }
  j["broken_implications"] = std::move(broken);
  return j;
}

// --- External explainers ------------------------------------------------------------

ExternalExplainer::ExternalExplainer(std::string command) : command_(std::move(command)) {
  std::signal(SIGPIPE, SIG_IGN);
  start();
}

ExternalExplainer::~ExternalExplainer() { stop(); }

void ExternalExplainer::start() {
  int in_pipe[2];
  int out_pipe[2];
  if (pipe2(in_pipe, O_CLOEXEC) != 0) {
    throw Error(ErrorCode::ExternalExplainerFailure, "pipe: " + std::string(std::strerror(errno)));
  }
  if (pipe2(out_pipe, O_CLOEXEC) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw Error(ErrorCode::ExternalExplainerFailure, "pipe: " + std::string(std::strerror(errno)));
  }
  const pid_t pid = fork();
  if (pid < 0) {
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) ::close(fd);
    throw Error(ErrorCode::ExternalExplainerFailure, "fork: " + std::string(std::strerror(errno)));
  }
  if (pid == 0) {
    dup2(in_pipe[0], STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  pid_ = pid;
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
}

void ExternalExplainer::stop() noexcept {
  if (to_child_ >= 0) ::close(to_child_);
  if (from_child_ >= 0) ::close(from_child_);
  to_child_ = from_child_ = -1;
  if (pid_ > 0) {
    int status = 0;
    waitpid(pid_, &status, 0);
  }
  pid_ = -1;
}

std::string ExternalExplainer::read_line() {
  while (true) {
    if (const auto nl = buffer_.find('\n'); nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return line;
    }
    char chunk[4096];
    const ssize_t got = ::read(from_child_, chunk, sizeof chunk);
    if (got < 0 && errno == EINTR) continue;
    if (got <= 0) {
      throw Error(ErrorCode::ExternalExplainerFailure,
                  "external explainer `" + command_ + "` closed its output");
    }
    buffer_.append(chunk, static_cast<std::size_t>(got));
  }
}

ExplanationSet ExternalExplainer::operator()(const Query& q) {
  std::lock_guard lock(mutex_);
  if (pid_ < 0) throw Error(ErrorCode::ExternalExplainerFailure, "external explainer stopped");
  const std::string request = query_to_json(q).dump() + "\n";
  std::size_t sent = 0;
  while (sent < request.size()) {
    const ssize_t n = ::write(to_child_, request.data() + sent, request.size() - sent);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) {
      throw Error(ErrorCode::ExternalExplainerFailure,
                  "cannot write to external explainer `" + command_ + "`");
    }
    sent += static_cast<std::size_t>(n);
  }
  const std::string line = read_line();
  try {
    return explanations_from_json(q.theory(), parse_json(line));
  } catch (const Error& e) {
    throw Error(ErrorCode::ExternalExplainerFailure,
                "external explainer `" + command_ + "` sent an invalid response: " + e.what());
  }
}

ExplainerUnderTest external_explainer(std::shared_ptr<ExternalExplainer> ex, std::string name) {
  if (name.empty()) name = ex->command();
  return {std::move(name), [ex](const Query& q) { return (*ex)(q); }};
}

}  // namespace cfx::io
