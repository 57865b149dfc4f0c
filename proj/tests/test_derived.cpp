#include <doctest.h>

#include <random>

#include "cfx/derived.hpp"
#include "cfx/error.hpp"
#include "oracles.hpp"

using namespace cfx;
using oracle::lits;

namespace {

std::vector<oracle::Values> sets(const Theory& t, std::vector<std::string> literal_sets) {
  std::vector<oracle::Values> out;
  for (const auto& s : literal_sets) out.push_back(oracle::values_of(lits(t, s)));
  std::sort(out.begin(), out.end());
  return out;
}

Ranking ranking_delta(const Query& q) {
  return ranking_from_weighting(weighting_delta(q), RankingMode::DeltaFeatureRefined);
}
Ranking ranking_sigma(const Query& q) {
  return ranking_from_weighting(weighting_sigma(q), RankingMode::MinIsBetter);
}

DistanceMeasure random_weights(std::mt19937_64& rng, std::size_t n) {
  std::vector<double> w(n);
  for (auto& v : w) v = static_cast<double>(rng() % 5) * 0.75;
  return DistanceMeasure::weighted(std::move(w));
}

}  // namespace

TEST_CASE("Example 1: literature explainers") {
  const Theory& t = builtin::example1().theory();
  // x5 = (freezing, climbing) is cinema and x4 = (freezing, skiing) is mountain,
  // so single-feature flips reach another class in every direction listed here.
  const std::vector<std::vector<oracle::Values>> want = {
      sets(t, {"t=mild", "t=freezing"}),
      sets(t, {"t=hot", "t=freezing", "a=reading", "a=skiing"}),
      sets(t, {"t=hot", "a=skiing"}),
  };
  const auto hamming = DistanceMeasure::hamming(2);
  for (int i = 1; i <= 3; ++i) {
    CAPTURE(i);
    const Query q = builtin::example1_query(i);
    CHECK(oracle::as_values(l_wf(q)) == want[static_cast<std::size_t>(i - 1)]);
    CHECK(oracle::as_values(l_c(q)) == want[static_cast<std::size_t>(i - 1)]);
    CHECK(l_d(q, hamming) == l_c(q));
    CHECK(faithful_max(q, ranking_delta(q)) == l_wf(q));
    CHECK(faithful_max(q, ranking_sigma(q)) == l_c(q));
  }
}

TEST_CASE("Example 1: a distance preferring mild weather") {
  const Query q1 = builtin::example1_query(1);
  const Theory& t = q1.theory();
  const ValueId freezing = t.value_id(0, "freezing");
  // Moving to freezing weather costs more than any other change.
  const auto skewed = DistanceMeasure::custom(
      "skewed", [freezing](const PartialAssignment& a, const PartialAssignment& b) {
        double d = 0;
        for (std::size_t f = 0; f < a.arity(); ++f) {
          if (a.value(f) != b.value(f)) {
            d += (a.value(f) == freezing || b.value(f) == freezing) && f == 0 ? 5.0 : 1.0;
          }
        }
        return d;
      });
  const Instance x2 = builtin::example1_instance(2);
  const Instance x1 = builtin::example1_instance(1);
  const Instance y = substitute(x1, lits(t, "t=freezing"));
  REQUIRE(skewed(x2, x1) < skewed(y, x1));
  CHECK(oracle::as_values(l_d(q1, skewed)) == sets(t, {"t=mild"}));
  const auto gamma = ranking_from_weighting(weighting_gamma(q1, skewed), RankingMode::MinIsBetter);
  CHECK(faithful_max(q1, gamma) == l_d(q1, skewed));
}

TEST_CASE("threshold explainer") {
  const Query q1 = builtin::example1_query(1);
  const Theory& t = q1.theory();
  const auto hamming = DistanceMeasure::hamming(2);
  CHECK(l_d_tau(q1, hamming, 0.0).empty());
  CHECK(oracle::as_values(l_d_tau(q1, hamming, 2.0)) == sets(t, {"t=mild", "t=freezing"}));
  CHECK(l_d_tau(q1, hamming, kInfinity) == c_suf(q1));
  CHECK(l_d(q1, DistanceMeasure::constant()) == c_suf(q1));
}

TEST_CASE("only the full flip changes the class") {
  const auto t = oracle::boolean_theory(2);
  const Classifier k = Classifier::tabulate(t, [](const Instance& y) {
    return static_cast<ClassId>(y.value(0) == 1 && y.value(1) == 1 ? 1 : 0);
  });
  const Query q = Query::create(k, builtin::instance({0, 0}));
  CHECK(oracle::as_values(l_c(q)) == sets(*t, {"p1=1, p2=1"}));
  CHECK(l_wf(q) == l_c(q));
}

TEST_CASE("weightings and rankings") {
  const Query q1 = builtin::example1_query(1);
  const Theory& t = q1.theory();
  const auto mild = lits(t, "t=mild");
  CHECK(weighting_delta(q1)(PartialAssignment(2)) == kInfinity);
  CHECK(weighting_delta(q1)(mild) == 1.0);
  CHECK(weighting_sigma(q1)(mild) == 1.0);
  CHECK(weighting_sigma(q1)(lits(t, "t=hot")) == kInfinity);
  CHECK(weighting_gamma(q1, DistanceMeasure::hamming(2))(mild) == 1.0);

  const Ranking f = ranking_delta(q1);
  const Instance x3 = builtin::example1_instance(3);
  CHECK(f.strictly_better(mild, x3));
  const Ranking c = ranking_sigma(q1);
  CHECK(c.geq(mild, lits(t, "t=freezing")));
  CHECK(c.geq(lits(t, "t=freezing"), mild));
  CHECK(c.strictly_better(x3, PartialAssignment(2)));

  CHECK(is_faithful(ranking_delta, q1).ok);
  CHECK(is_faithful(ranking_sigma, q1).ok);
  CHECK(is_faithful(
            [](const Query& q) {
              return ranking_from_weighting(weighting_gamma(q, DistanceMeasure::hamming(2)),
                                            RankingMode::MinIsBetter);
            },
            q1)
            .ok);

  const auto reversed = [](const Query& q) {
    const Weighting w = weighting_sigma(q);
    return Ranking{"reversed", [w](const PartialAssignment& a, const PartialAssignment& b) {
                     return w(a) >= w(b);
                   }};
  };
  const auto verdict = is_faithful(reversed, q1);
  CHECK_FALSE(verdict.ok);
  REQUIRE(verdict.counterexample);
  CHECK(is_csr(q1, verdict.counterexample->first));
  CHECK_FALSE(is_csr(q1, verdict.counterexample->second));

  const auto flat = [](const Query&) {
    return Ranking{"flat", [](const PartialAssignment&, const PartialAssignment&) { return true; }};
  };
  CHECK_FALSE(is_faithful(flat, q1).ok);
}

TEST_CASE("faithful_max detects a relation that is not a preorder") {
  const Query q1 = builtin::example1_query(1);
  const Ranking close{"close", [](const PartialAssignment& a, const PartialAssignment& b) {
                        const auto d = static_cast<long>(a.size()) - static_cast<long>(b.size());
                        return d <= 1 && d >= -1;
                      }};
  try {
    faithful_max(q1, close);
    FAIL("expected NotAPreorder");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotAPreorder);
  }
  CHECK_NOTHROW(faithful_max(q1, close, false));
}

TEST_CASE("distance measures") {
  const auto h = DistanceMeasure::hamming(3);
  CHECK(h(builtin::instance({0, 1, 2}), builtin::instance({0, 0, 0})) == 2.0);
  const auto w = DistanceMeasure::weighted({1.0, 2.5, 0.5});
  CHECK(w(builtin::instance({1, 1, 1}), builtin::instance({0, 0, 1})) == 3.5);
  REQUIRE(w.weights());
  CHECK(w.weights()->at(1) == 2.5);
  CHECK_FALSE(DistanceMeasure::constant().weights());
  CHECK_THROWS_AS(DistanceMeasure::weighted({1.0, -1.0}), Error);
  CHECK_THROWS_AS(DistanceMeasure::weighted({kInfinity}), Error);
}

TEST_CASE("derived explainers agree with the definitional oracle") {
  std::mt19937_64 rng(59);
  for (int round = 0; round < 50; ++round) {
    const std::size_t n = 1 + rng() % 3;
    auto t = oracle::random_theory(rng, n, 3, 2 + rng() % 2);
    if (t->instance_count() < t->num_classes()) t = oracle::random_theory(rng, n, 3, 2);
    const Classifier k = oracle::random_table(rng, t);
    const auto hamming = DistanceMeasure::hamming(n);
    const auto weighted = random_weights(rng, n);
    const double tau = static_cast<double>(rng() % 4);
    const auto all = oracle::all_assignments(*t);
    for (const auto& y : enumerate_instances(*t)) {
      const Query q = Query::create(k, Instance(y));
      const auto wf = l_wf(q);
      const auto c = l_c(q);
      const auto dh = l_d(q, hamming);
      const auto dw = l_d(q, weighted);
      const auto dt = l_d_tau(q, weighted, tau);
      CHECK(oracle::as_values(wf) == oracle::family(ExplainerKind::Lwf, q));
      CHECK(oracle::as_values(c) == oracle::family(ExplainerKind::Lc, q));
      CHECK(oracle::as_values(dh) == oracle::family(ExplainerKind::Ld, q, &hamming));
      CHECK(oracle::as_values(dw) == oracle::family(ExplainerKind::Ld, q, &weighted));
      CHECK(oracle::as_values(dt) == oracle::family(ExplainerKind::LdTau, q, &weighted, tau));

      for (const auto& e : all) {
        const auto pa = oracle::make(e);
        CHECK(is_member_derived(ExplainerKind::Lwf, q, pa) ==
              oracle::member(ExplainerKind::Lwf, q, e));
        CHECK(is_member_derived(ExplainerKind::Lc, q, pa) ==
              oracle::member(ExplainerKind::Lc, q, e));
        CHECK(is_member_derived(ExplainerKind::Ld, q, pa, &weighted) ==
              oracle::member(ExplainerKind::Ld, q, e, &weighted));
        CHECK(is_member_derived(ExplainerKind::LdTau, q, pa, &weighted, tau) ==
              oracle::member(ExplainerKind::LdTau, q, e, &weighted, tau));
        CHECK(is_csr(q, pa) == oracle::member(ExplainerKind::CSuf, q, e));
      }

      const auto cs = c_suf(q);
      CHECK(wf.subset_of(cs));
      CHECK(c.subset_of(wf));
      CHECK(dw.subset_of(cs));
      CHECK(dt.subset_of(cs));
      CHECK_FALSE(c.empty());
      CHECK_FALSE(dw.empty());
      CHECK(dh == c);

      CHECK(faithful_max(q, ranking_delta(q)) == wf);
      CHECK(faithful_max(q, ranking_sigma(q)) == c);
      CHECK(faithful_max(q, ranking_from_weighting(weighting_gamma(q, weighted),
                                                   RankingMode::MinIsBetter)) == dw);
      CHECK(explain(ExplainerKind::Ld, q) == dh);
      CHECK(explain(ExplainerKind::LdTau, q, std::nullopt, &weighted, tau) == dt);
    }
  }
}
