#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>

#include <json.hpp>

#include "cfx/axioms.hpp"

namespace cfx::io {

using Json = nlohmann::json;

/// Throws ParseError carrying the 1-based line and column of the failure.
Json parse_json(std::string_view text);
/// Two-space indentation, sorted keys, trailing newline.
std::string dump(const Json& j);
/// Whole file as bytes. Throws InvalidArgument when it cannot be read.
std::string read_file(const std::filesystem::path& path);

// --- Theory and assignments ----------------------------------------------------

/// {"features":[{"name":"t","domain":["hot",...]},...],"classes":[...]}
Theory theory_from_json(const Json& j);
Json theory_to_json(const Theory& t);
TheoryPtr load_theory(const std::filesystem::path& path);

/// {"t":"hot"}. Unknown features or values throw UnknownIdentifier.
PartialAssignment assignment_from_json(const Theory& t, const Json& j);
/// As above, and every feature must be assigned.
Instance instance_from_json(const Theory& t, const Json& j);
Json assignment_to_json(const Theory& t, const PartialAssignment& e);

/// {"kind":"sNec","count":2,"truncated":false,"explanations":[...]}
Json explanations_to_json(const Theory& t, const ExplanationSet& s);
/// Checks that "count" matches the list.
ExplanationSet explanations_from_json(const Theory& t, const Json& j);

// --- Classifiers -------------------------------------------------------------------

/// Header: the feature names in theory order, then `class`. One row per
/// instance in any order. Missing or repeated rows throw IncompleteTable.
Classifier table_from_csv(TheoryPtr t, std::string_view text);
/// Rows in enumeration order.
std::string table_to_csv(const Classifier& k);

/// First line `classes: <true-class>,<false-class>`, then the formula. Blank
/// lines and lines starting with `#` are skipped.
Classifier formula_from_text(TheoryPtr t, std::string_view text);
std::string formula_to_text(const Classifier& k);

/// {"type":"table","rows":[{"instance":{...},"class":"beach"},...]} or
/// {"type":"formula","formula":"f1 <-> f2","classes":["1","0"]}.
Classifier classifier_from_json(TheoryPtr t, const Json& j);
Json classifier_to_json(const Classifier& k);

/// `.csv` is a table, `.json` is classifier JSON; anything else is a formula
/// file when its first meaningful line starts with `classes:`, a table otherwise.
Classifier load_classifier(TheoryPtr t, const std::filesystem::path& path);

// --- Queries -----------------------------------------------------------------------

/// {"theory":...,"classifier":...,"instance":{...}}
Json query_to_json(const Query& q);
Query query_from_json(const Json& j);
Query load_query(const std::filesystem::path& path);

/// Theory file + classifier file + instance file, surjectivity enforced.
Query ingest(const std::filesystem::path& theory, const std::filesystem::path& classifier,
             const std::filesystem::path& instance);

/// {"t": 1.0, "a": 2.5}; omitted features weigh 1.0.
DistanceMeasure weights_from_json(const Theory& t, const Json& j);

// --- Audit reports -----------------------------------------------------------------

/// Replayable: carries the JSON of the offending queries under "queries".
Json counterexample_to_json(const Counterexample& cx, const QuerySuite& suite);
/// The suite made of the queries stored in a counterexample.
QuerySuite counterexample_suite(const Json& cx);

/// Verdict per axiom, the expected row when known, mismatches and broken implications.
Json profile_to_json(const AxiomProfile& p, const QuerySuite& suite);

// --- External explainers ------------------------------------------------------------

/// A long-lived subprocess speaking line-delimited JSON: one Query JSON per
/// request line on its stdin, one ExplanationSet JSON per response line on its
/// stdout. Requests are serialized. Any protocol violation throws
/// ExternalExplainerFailure. SIGPIPE is ignored process-wide once started.
class ExternalExplainer {
 public:
  /// Runs `command` through /bin/sh.
  explicit ExternalExplainer(std::string command);
  ~ExternalExplainer();
  ExternalExplainer(const ExternalExplainer&) = delete;
  ExternalExplainer& operator=(const ExternalExplainer&) = delete;

  ExplanationSet operator()(const Query& q);
  const std::string& command() const noexcept { return command_; }

 private:
  void start();
  void stop() noexcept;
  std::string read_line();

  std::string command_;
  std::mutex mutex_;
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
};

/// Wraps a shared ExternalExplainer for auditing; the name is the command.
ExplainerUnderTest external_explainer(std::shared_ptr<ExternalExplainer> ex,
                                      std::string name = {});

}  // namespace cfx::io
