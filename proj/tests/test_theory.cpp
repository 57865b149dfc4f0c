#include <doctest.h>

#include <random>
#include <set>

#include "cfx/error.hpp"
#include "cfx/formula.hpp"
#include "cfx/theory.hpp"
#include "oracles.hpp"

using namespace cfx;

namespace {

TheoryPtr example_theory() { return builtin::example1().theory_ptr(); }

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("theory validation") {
  CHECK(code_of([] { Theory::create({{"t", {"hot"}}}, {"a", "b"}); }) == ErrorCode::DomainTooSmall);
  CHECK(code_of([] { Theory::create({{"t", {"hot", "cold"}}}, {"a"}); }) ==
        ErrorCode::TooFewClasses);
  CHECK(code_of([] { Theory::create({{"t", {"hot", "hot"}}}, {"a", "b"}); }) ==
        ErrorCode::DuplicateIdentifier);
  CHECK(code_of([] { Theory::create({{"t", {"0", "1"}}, {"t", {"0", "1"}}}, {"a", "b"}); }) ==
        ErrorCode::DuplicateIdentifier);
  CHECK(code_of([] { Theory::create({{"t", {"0", "1"}}}, {"a", "a"}); }) ==
        ErrorCode::DuplicateIdentifier);

  const auto t = example_theory();
  CHECK(t->num_features() == 2);
  CHECK(t->instance_count() == 9);
  CHECK(t->partial_assignment_count() == 16);
  CHECK(t->feature_id("a") == 1);
  CHECK(t->value_id(0, "freezing") == 2);
  CHECK(t->class_id("cinema") == 2);
  CHECK_FALSE(t->is_boolean());
  CHECK(code_of([&] { (void)t->feature_id("weather"); }) == ErrorCode::UnknownIdentifier);
  CHECK(code_of([&] { (void)t->class_id("park"); }) == ErrorCode::UnknownClass);
}

TEST_CASE("partial assignments reject conflicting literals") {
  const auto t = example_theory();
  const std::vector<Literal> ok = {{0, 1}, {1, 0}};
  const auto e = PartialAssignment::from_literals(*t, ok);
  CHECK(e.size() == 2);
  CHECK(e.is_complete());
  const std::vector<Literal> clash = {{0, 1}, {0, 2}};
  CHECK(code_of([&] { PartialAssignment::from_literals(*t, clash); }) ==
        ErrorCode::InvalidArgument);
  CHECK(code_of([] { Instance(PartialAssignment(2)); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("text rendering follows feature order") {
  const auto t = example_theory();
  auto e = PartialAssignment(2);
  CHECK(to_text(*t, e).empty());
  CHECK(braced(*t, e) == "{}");
  e.set(1, 0);
  e.set(0, 1);
  CHECK(to_text(*t, e) == "t=mild, a=climbing");
}

TEST_CASE("enumerations match independent recursion") {
  std::mt19937_64 rng(7);
  for (int round = 0; round < 20; ++round) {
    const auto t = oracle::random_theory(rng, 1 + rng() % 4, 4, 2);
    std::vector<oracle::Values> got;
    for (const auto& e : enumerate_partial_assignments(*t)) got.push_back(oracle::values_of(e));
    CHECK(got == oracle::all_assignments(*t));
    CHECK(got.size() == t->partial_assignment_count());

    std::vector<oracle::Values> inst;
    for (const auto& y : enumerate_instances(*t)) inst.push_back(oracle::values_of(y));
    CHECK(inst == oracle::all_instances(*t));
    for (std::uint64_t r = 0; r < inst.size(); ++r) {
      CHECK(instance_rank(*t, instance_at(*t, r)) == r);
      CHECK(oracle::values_of(instance_at(*t, r)) == inst[r]);
    }
  }
}

TEST_CASE("assignment algebra laws") {
  std::mt19937_64 rng(11);
  for (int round = 0; round < 30; ++round) {
    const auto t = oracle::random_theory(rng, 1 + rng() % 3, 3, 2);
    const auto all = oracle::all_assignments(*t);
    const auto insts = oracle::all_instances(*t);
    const auto xv = insts[rng() % insts.size()];
    const Instance x(oracle::make(xv));
    for (const auto& ev : all) {
      const auto e = oracle::make(ev);
      // x with E substituted.
      const Instance xe = substitute(x, e);
      CHECK(oracle::values_of(xe) == oracle::substitute(xv, ev));
      CHECK(e.subset_of(xe));

      // Residual: every y with x \ y = E.
      std::vector<oracle::Values> expect;
      for (const auto& y : insts) {
        if (oracle::minus(xv, y) == ev) expect.push_back(y);
      }
      std::vector<oracle::Values> got;
      for (const auto& y : residual(*t, x, e)) got.push_back(oracle::values_of(y));
      std::sort(got.begin(), got.end());
      CHECK(got == expect);
      if (!oracle::subset(ev, xv)) CHECK(got.empty());

      // Extensions: every y containing E.
      std::size_t ext = 0;
      for (const auto& y : extensions(*t, e)) {
        CHECK(e.subset_of(y));
        ++ext;
      }
      CHECK(ext == static_cast<std::size_t>(std::count_if(
                       insts.begin(), insts.end(), [&](const auto& y) { return oracle::subset(ev, y); })));

      // Disjoint assignments: exactly those sharing no literal with E.
      std::size_t disj = 0;
      for (const auto& d : disjoint_assignments(*t, e)) {
        CHECK(d.disjoint_with(e));
        ++disj;
      }
      CHECK(disj == static_cast<std::size_t>(std::count_if(
                        all.begin(), all.end(), [&](const auto& d) { return oracle::disjoint(d, ev); })));

      CHECK(oracle::values_of(e.minus(x)) == oracle::minus(ev, xv));
      CHECK(e.subset_of(x) == oracle::subset(ev, xv));
      CHECK(e.disjoint_with(x) == oracle::disjoint(ev, xv));
    }
  }
}

TEST_CASE("canonical order is size then literal sequence") {
  const auto t = example_theory();
  std::vector<PartialAssignment> all;
  for (const auto& e : enumerate_partial_assignments(*t)) all.push_back(e);
  std::sort(all.begin(), all.end(), canonical_less);
  for (std::size_t i = 0; i + 1 < all.size(); ++i) {
    const auto& a = all[i];
    const auto& b = all[i + 1];
    REQUIRE(a.size() <= b.size());
    if (a.size() == b.size()) CHECK(a.literals() < b.literals());
    CHECK_FALSE(canonical_less(b, a));
  }
  CHECK(all.front().empty());
}

TEST_CASE("formula parser") {
  const auto t = builtin::equivalence_formula().theory_ptr();
  const auto phi = parse_formula("!(f1 & f2) -> f1 | f2 <-> f2", *t);
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      const bool f1 = a == 1;
      const bool f2 = b == 1;
      const bool expect = ((!(f1 && f2)) ? (f1 || f2) : true) == f2;
      const std::vector<ValueId> v = {a, b};
      CHECK(phi.evaluate(v) == expect);
    }
  }
  // Rendering reparses to the same program.
  CHECK(parse_formula(phi.to_string(*t), *t) == phi);
  // Implication associates to the right.
  CHECK(parse_formula("f1 -> f2 -> f1", *t) == parse_formula("f1 -> (f2 -> f1)", *t));

  try {
    parse_formula("f1 &\n  (f2 | )", *t);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(e.column() == 9);
  }
  CHECK_THROWS_AS(parse_formula("f1 & f3", *t), ParseError);
  CHECK_THROWS_AS(parse_formula("(f1", *t), ParseError);
  CHECK_THROWS_AS(parse_formula("", *t), ParseError);
}

TEST_CASE("random formulas render and reparse") {
  std::mt19937_64 rng(5);
  const auto t = oracle::boolean_theory(4);
  for (int i = 0; i < 200; ++i) {
    const auto phi = oracle::random_formula(rng, 4, 4);
    const auto back = parse_formula(phi.to_string(*t), *t);
    for (const auto& y : oracle::all_instances(*t)) CHECK(back.evaluate(y) == phi.evaluate(y));
  }
}
