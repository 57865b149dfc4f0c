#include <doctest.h>

#include <cstdlib>
#include <filesystem>

#include "cfx/axioms.hpp"
#include "cfx/error.hpp"
#include "cfx/io.hpp"
#include "oracles.hpp"

using namespace cfx;
namespace fs = std::filesystem;
using io::Json;

namespace {

fs::path fixtures() {
  const char* dir = std::getenv("CFX_FIXTURES");
  return dir != nullptr ? fs::path(dir) : fs::path(CFX_SOURCE_DIR) / "fixtures";
}

std::pair<std::size_t, std::size_t> parse_error_at(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const ParseError& e) {
    return {e.line(), e.column()};
  }
  FAIL("expected a parse error");
  return {0, 0};
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::InvalidArgument;
}

const char* kExampleCsvHeader = "t,a,class\n";

std::string example_rows(bool drop_last) {
  std::string s = kExampleCsvHeader;
  s += "hot,climbing,beach\nhot,reading,beach\nhot,skiing,beach\n";
  s += "mild,climbing,mountain\nmild,reading,cinema\n";
  if (!drop_last) s += "mild,skiing,cinema\n";
  s += "freezing,climbing,cinema\nfreezing,reading,cinema\nfreezing,skiing,mountain\n";
  return s;
}

}  // namespace

TEST_CASE("fixture files load into Example 1") {
  const fs::path dir = fixtures() / "example1";
  for (int i = 1; i <= 9; ++i) {
    const Query q = io::ingest(dir / "theory.json", dir / "classifier.csv",
                               dir / ("x" + std::to_string(i) + ".json"));
    const Query want = builtin::example1_query(i);
    CHECK(q.instance() == want.instance());
    CHECK(q.label() == want.label());
    CHECK(q.classifier().same_function(want.classifier()));
  }
  const Query iff = io::ingest(fixtures() / "iff/theory.json", fixtures() / "iff/classifier.formula",
                               fixtures() / "iff/x.json");
  CHECK(iff.classifier().kind() == Classifier::Kind::Formula);
  CHECK(iff.classifier().same_function(builtin::equivalence_formula()));
}

TEST_CASE("JSON diagnostics carry a position") {
  CHECK(parse_error_at([] { io::parse_json("{\n  \"a\": [1, 2,\n}"); }).first == 3);
  const auto t = builtin::example1().theory_ptr();
  CHECK(code_of([&] { io::assignment_from_json(*t, io::parse_json(R"({"t": "warm"})")); }) ==
        ErrorCode::UnknownIdentifier);
  CHECK(code_of([&] { io::assignment_from_json(*t, io::parse_json(R"({"weather": "hot"})")); }) ==
        ErrorCode::UnknownIdentifier);
  CHECK(code_of([&] { io::instance_from_json(*t, io::parse_json(R"({"t": "hot"})")); }) ==
        ErrorCode::TheoryMismatch);
  CHECK_THROWS_AS(io::theory_from_json(io::parse_json(R"({"features": 3, "classes": []})")), Error);
  CHECK(code_of([] {
          io::theory_from_json(
              io::parse_json(R"({"features":[{"name":"t","domain":["a"]}],"classes":["x","y"]})"));
        }) == ErrorCode::DomainTooSmall);
}

TEST_CASE("CSV tables") {
  const auto t = builtin::example1().theory_ptr();
  const Classifier k = io::table_from_csv(t, example_rows(false));
  CHECK(k.same_function(builtin::example1()));
  CHECK(io::table_from_csv(t, io::table_to_csv(k)).same_function(k));

  // x9 = (mild, skiing) left out.
  CHECK(code_of([&] { io::table_from_csv(t, example_rows(true)); }) == ErrorCode::IncompleteTable);
  CHECK(code_of([&] { io::table_from_csv(t, example_rows(false) + "hot,skiing,beach\n"); }) ==
        ErrorCode::IncompleteTable);
  CHECK(parse_error_at([&] { io::table_from_csv(t, std::string(kExampleCsvHeader) + "hot,boating,beach\n"); })
            .first == 2);
  CHECK(parse_error_at([&] { io::table_from_csv(t, std::string(kExampleCsvHeader) + "hot,skiing\n"); })
            .first == 2);
  CHECK(parse_error_at([&] { io::table_from_csv(t, "a,t,class\n"); }).first == 1);
}

TEST_CASE("formula classifiers") {
  const auto b = builtin::equivalence_formula().theory_ptr();
  const Classifier k = io::formula_from_text(b, "# comment\nclasses: 1,0\nf1 <-> f2\n");
  CHECK(k.same_function(builtin::equivalence_formula()));
  CHECK(io::formula_from_text(b, io::formula_to_text(k)).same_function(k));
  CHECK(parse_error_at([&] { io::formula_from_text(b, "classes: 1,0\nf1 & \n"); }).first == 2);
  CHECK_THROWS_AS(io::formula_from_text(b, "f1 <-> f2\n"), ParseError);

  // A three-valued feature cannot carry a propositional atom.
  const auto t = builtin::example1().theory_ptr();
  CHECK(code_of([&] { io::formula_from_text(t, "classes: beach,cinema\nt\n"); }) ==
        ErrorCode::NotBoolean);
}

TEST_CASE("queries round trip through JSON with identical explanations") {
  std::vector<Query> queries;
  for (int i = 1; i <= 9; ++i) queries.push_back(builtin::example1_query(i));
  queries.push_back(Query::create(builtin::equivalence_formula(), builtin::instance({0, 1})));
  queries.push_back(Query::create(builtin::appendix1(), builtin::instance({1, 0})));
  for (const Query& q : queries) {
    const std::string text = io::dump(io::query_to_json(q));
    const Query back = io::query_from_json(io::parse_json(text));
    CHECK(io::dump(io::query_to_json(back)) == text);
    for (auto kind : {ExplainerKind::GNec, ExplainerKind::SNec, ExplainerKind::GSuf,
                      ExplainerKind::SSuf, ExplainerKind::CSuf, ExplainerKind::Lwf,
                      ExplainerKind::Lc, ExplainerKind::Ld, ExplainerKind::LdTau}) {
      const auto a = explain(kind, q);
      const auto b = explain(kind, back);
      CHECK(a == b);
      CHECK(io::dump(io::explanations_to_json(q.theory(), a)) ==
            io::dump(io::explanations_to_json(back.theory(), b)));
    }
  }
}

TEST_CASE("explanation sets round trip") {
  const Query q = builtin::example1_query(2);
  const ExplanationSet s = g_suf(q, 3);
  const Json j = io::explanations_to_json(q.theory(), s);
  CHECK(j["count"] == 3);
  CHECK(j["truncated"] == true);
  CHECK(io::explanations_from_json(q.theory(), j) == s);
  Json bad = j;
  bad["count"] = 5;
  CHECK_THROWS_AS(io::explanations_from_json(q.theory(), bad), Error);
}

TEST_CASE("weights files") {
  const Theory& t = builtin::example1().theory();
  const auto w = io::weights_from_json(t, io::parse_json(io::read_file(fixtures() / "weights/example1.json")));
  REQUIRE(w.weights());
  CHECK(*w.weights() == std::vector<double>{1.0, 2.5});
  CHECK(io::weights_from_json(t, io::parse_json(R"({"a": 3})")).weights()->front() == 1.0);
  CHECK_THROWS_AS(io::weights_from_json(t, io::parse_json(R"({"a": -3})")), Error);
  CHECK_THROWS_AS(io::weights_from_json(t, io::parse_json(R"({"wind": 1})")), Error);
}

TEST_CASE("audit profiles serialize deterministically") {
  const QuerySuite suite = example1_suite();
  const auto p = audit(builtin_explainer(ExplainerKind::CSuf), suite);
  const std::string a = io::dump(io::profile_to_json(p, suite));
  const std::string b = io::dump(io::profile_to_json(audit(builtin_explainer(ExplainerKind::CSuf), suite, 3), suite));
  CHECK(a == b);
  const Json j = io::parse_json(a);
  CHECK(j["explainer"] == "cSuf");
  CHECK(j["verdicts"]["Success"]["status"] == "no-violation-found");
  CHECK(j["verdicts"]["Coreness"]["counterexample"]["query_label"] == "example1/x1");
}

TEST_CASE("external explainers over a pipe") {
  const fs::path script = fs::path(CFX_SOURCE_DIR) / "tests/scripts/echo_explainer.py";
  auto echo = std::make_shared<io::ExternalExplainer>("python3 -u '" + script.string() + "'");
  const auto l = io::external_explainer(echo, "echo");
  const QuerySuite suite = example1_suite();
  const auto outputs = run_explainer(l, suite, 3);
  for (std::size_t i = 0; i < suite.size(); ++i) {
    REQUIRE(outputs[i].size() == 1);
    CHECK(outputs[i].items().front() == suite.query(i).instance());
  }
  // Returning x itself is feasible but never novel.
  const auto p = audit(l, suite);
  CHECK(p.satisfied(AxiomId::Feasibility));
  CHECK_FALSE(p.satisfied(AxiomId::Novelty));

  io::ExternalExplainer garbage("echo not-json");
  CHECK(code_of([&] { garbage(builtin::example1_query(1)); }) == ErrorCode::ExternalExplainerFailure);
  io::ExternalExplainer silent("exit 0");
  CHECK(code_of([&] { silent(builtin::example1_query(1)); }) == ErrorCode::ExternalExplainerFailure);
}
