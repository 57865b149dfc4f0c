// Acceptance gate: one PASS/FAIL line per criterion, with the failing
// sub-checks listed underneath. Exit status is nonzero when any fails.

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cfx/axioms.hpp"
#include "cfx/io.hpp"
#include "cfx/sat_explain.hpp"
#include "oracles.hpp"

using namespace cfx;

namespace {

class Criterion {
 public:
  Criterion(int id, std::string title) : id_(id), title_(std::move(title)) {}

  void check(bool ok, const std::string& what) {
    ++checks_;
    if (!ok) failures_.push_back(what);
  }
  /// Counts a check that passed without building its message.
  void passed() { ++checks_; }

  /// Runs the body, turning an escaped exception into a failure.
  bool run(const std::function<void(Criterion&)>& body, double time_limit) {
    const auto start = std::chrono::steady_clock::now();
    try {
      body(*this);
    } catch (const std::exception& e) {
      failures_.push_back(std::string("exception: ") + e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > time_limit) {
      std::ostringstream msg;
      msg << "runtime " << secs << " s exceeds " << time_limit << " s";
      failures_.push_back(msg.str());
    }
    const bool pass = failures_.empty();
    std::printf("criterion %d %s: %s (%zu checks, %.2f s)\n", id_, title_.c_str(),
                pass ? "PASS" : "FAIL", checks_, secs);
    constexpr std::size_t kShown = 12;
    for (std::size_t i = 0; i < failures_.size() && i < kShown; ++i) {
      std::printf("    - %s\n", failures_[i].c_str());
    }
    if (failures_.size() > kShown) {
      std::printf("    - ... %zu more\n", failures_.size() - kShown);
    }
    std::fflush(stdout);
    return pass;
  }

 private:
  int id_;
  std::string title_;
  std::size_t checks_ = 0;
  std::vector<std::string> failures_;
};

std::string render(const Theory& t, const std::vector<PartialAssignment>& items) {
  std::string out = "{";
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? ", " : "") + braced(t, items[i]);
  return out + "}";
}

/// Compares an explanation set with the listed literal sets and instances.
void expect_set(Criterion& c, const std::string& name, const Theory& t, const ExplanationSet& got,
                const std::vector<std::string>& literal_sets, const std::vector<int>& instances = {}) {
  std::vector<PartialAssignment> want;
  for (const auto& s : literal_sets) want.push_back(oracle::lits(t, s));
  for (int i : instances) want.push_back(builtin::example1_instance(i));
  const ExplanationSet w("", want);
  c.check(got == w, name + ": expected " + render(t, w.items()) + ", got " + render(t, got.items()));
}

// --- 1 -------------------------------------------------------------------------

void golden_example1(Criterion& c) {
  const Classifier k = builtin::example1();
  const Theory& t = k.theory();
  const Query q1 = builtin::example1_query(1);
  const Query q2 = builtin::example1_query(2);
  const Query q3 = builtin::example1_query(3);

  expect_set(c, "gNec(Q1)", t, g_nec(q1), {"t=hot"});
  expect_set(c, "gNec(Q2)", t, g_nec(q2), {});
  expect_set(c, "gNec(Q3)", t, g_nec(q3), {});

  expect_set(c, "sNec(Q1)", t, s_nec(q1), {"t=hot"}, {1});
  expect_set(c, "sNec(Q2)", t, s_nec(q2), {"t=mild", "a=climbing"});
  expect_set(c, "sNec(Q3)", t, s_nec(q3), {});

  c.check(g_suf(q1).size() == 8, "gSuf(Q1) should have exactly 8 members");
  expect_set(c, "gSuf(Q1)", t, g_suf(q1), {"t=mild", "t=freezing"}, {2, 3, 4, 5, 8, 9});
  expect_set(c, "gSuf(Q2)", t, g_suf(q2), {"t=hot", "a=reading"}, {1, 3, 5, 6, 7, 8, 9});
  expect_set(c, "gSuf(Q3)", t, g_suf(q3), {"t=hot"}, {1, 2, 4, 6, 7});

  expect_set(c, "sSuf(Q1)", t, s_suf(q1), {"t=mild", "t=freezing"}, {3, 4, 8, 9});
  expect_set(c, "sSuf(Q2)", t, s_suf(q2), {"t=hot", "a=reading"}, {3, 6, 7});
  expect_set(c, "sSuf(Q3)", t, s_suf(q3), {"t=hot"}, {1, 2, 7});
  c.check(c_suf(q1) == s_suf(q1), "cSuf(Q1) should equal sSuf(Q1)");

  const std::vector<std::vector<std::string>> listed = {
      {"t=mild", "t=freezing"}, {"t=hot", "a=reading"}, {"t=hot"}};
  for (int i = 1; i <= 3; ++i) {
    const Query q = builtin::example1_query(i);
    const std::string n = std::to_string(i);
    expect_set(c, "Lwf(Q" + n + ")", t, l_wf(q), listed[static_cast<std::size_t>(i - 1)]);
    expect_set(c, "Lc(Q" + n + ")", t, l_c(q), listed[static_cast<std::size_t>(i - 1)]);
    c.check(l_c(q) == l_wf(q), "Lc(Q" + n + ") should equal Lwf(Q" + n + ")");
  }

  c.check(core_literals(k, t.class_id("beach")) == oracle::lits(t, "t=hot"), "Core(beach)");
  c.check(core_literals(k, t.class_id("mountain")).empty(), "Core(mountain) should be empty");
  c.check(core_literals(k, t.class_id("cinema")).empty(), "Core(cinema) should be empty");
}

// --- 2 -------------------------------------------------------------------------

void golden_appendix(Criterion& c) {
  const Classifier a1 = builtin::appendix1();
  const Theory& t1 = a1.theory();
  c.check(core_literals(a1, 0) == oracle::lits(t1, "f1=0, f2=0"), "Core(c1) = {f1=0, f2=0}");
  c.check(core_literals(a1, 1).empty(), "Core(c2) should be empty");
  c.check(core_literals(a1, 2) == oracle::lits(t1, "f1=1, f2=1"), "Core(c3) = {f1=1, f2=1}");

  const QuerySuite s2 = appendix2_suite();
  const Query& q = s2.query(0);
  expect_set(c, "appendix example 2: sNec(Q1)", q.theory(), s_nec(q), {"f1=0"});
  const AxiomProfile p = audit(builtin_explainer(ExplainerKind::SNec), s2);
  for (auto a : kAllAxioms) {
    const bool should_fail = a == AxiomId::Coreness || a == AxiomId::Novelty ||
                             a == AxiomId::StrongValidity || a == AxiomId::WeakValidity;
    c.check(p.satisfied(a) != should_fail,
            std::string(to_string(a)) + (should_fail ? " should be flagged" : " should hold"));
  }
}

// --- 3 -------------------------------------------------------------------------

void table_conformance(Criterion& c) {
  const QuerySuite suite = builtin_suite();
  c.check(suite.size() > 0, "built-in suite is empty");
  for (auto kind : {ExplainerKind::GNec, ExplainerKind::SNec, ExplainerKind::GSuf,
                    ExplainerKind::SSuf, ExplainerKind::CSuf}) {
    const auto l = builtin_explainer(kind);
    const AxiomProfile p = audit(l, suite, 4);
    const std::string name(to_string(kind));
    c.check(p.expected.has_value(), name + " has no expected row");
    for (auto a : p.mismatches) c.check(false, name + " / " + std::string(to_string(a)) + " differs");
    for (auto a : kAllAxioms) {
      const Verdict& v = p.verdicts[static_cast<std::size_t>(a)];
      if (!v.violated()) continue;
      const std::string cell = name + " / " + std::string(to_string(a));
      c.check(replay(a, *v.counterexample, l, suite), cell + ": counterexample does not replay");
      const QuerySuite back =
          io::counterexample_suite(io::counterexample_to_json(*v.counterexample, suite));
      c.check(check_axiom(a, l, back).violated(), cell + ": stored counterexample does not replay");
    }
  }
}

// --- 4 -------------------------------------------------------------------------

void property_suites(Criterion& c) {
  const QuerySuite suite = exhaustive_suite();
  c.check(suite.size() > 0, "exhaustive suite is empty");
  std::size_t violations = 0;
  auto law = [&](bool ok, const std::string& what, std::size_t i) {
    if (ok) {
      c.passed();
    } else if (++violations <= 20) {
      c.check(false, suite.label(i) + ": " + what);
    }
  };
  for (std::size_t i = 0; i < suite.size(); ++i) {
    const Query& q = suite.query(i);
    const Theory& t = q.theory();
    const Instance& x = q.instance();
    const auto gn = g_nec(q);
    const auto sn = s_nec(q);
    const auto gs = g_suf(q);
    const auto ss = s_suf(q);
    const auto cs = c_suf(q);
    const auto wf = l_wf(q);
    const auto lc = l_c(q);
    const auto hamming = DistanceMeasure::hamming(t.num_features());
    const auto ld = l_d(q, hamming);

    law(gn.subset_of(sn), "gNec not within sNec", i);
    law(ss.subset_of(gs), "sSuf not within gSuf", i);
    law(ss.subset_of(cs), "sSuf not within cSuf", i);
    for (const auto& e : cs) {
      bool lifted = false;
      for (const auto& g : gs) lifted = lifted || g.minus(x) == e;
      law(lifted, "cSuf member " + braced(t, e) + " is not E' \\ x for any E' in gSuf", i);
    }
    for (const auto& g : gs) law(cs.contains(g.minus(x)), "gSuf member minus x not in cSuf", i);
    law(lc.subset_of(wf), "Lc not within Lwf", i);
    law(wf.subset_of(cs), "Lwf not within cSuf", i);

    // gNec is exactly the nonempty subsets of the core, both directions.
    const auto core = core_literals(q.classifier(), q.label());
    for (const auto& e : gn) law(!e.empty() && e.subset_of(core), "gNec member outside the core", i);
    for (const auto& e : enumerate_partial_assignments(t)) {
      if (!e.empty() && e.subset_of(core)) law(gn.contains(e), "nonempty core subset missing", i);
    }

    const auto delta = ranking_from_weighting(weighting_delta(q), RankingMode::DeltaFeatureRefined);
    const auto sigma = ranking_from_weighting(weighting_sigma(q), RankingMode::MinIsBetter);
    const auto gamma = ranking_from_weighting(weighting_gamma(q, hamming), RankingMode::MinIsBetter);
    law(faithful_max(q, delta, false) == wf, "max under delta-feature ranking differs from Lwf", i);
    law(faithful_max(q, sigma, false) == lc, "max under sigma ranking differs from Lc", i);
    law(faithful_max(q, gamma, false) == ld, "max under gamma ranking differs from Ld", i);

    law(!cs.empty(), "cSuf is empty", i);
  }
  c.check(violations == 0, std::to_string(violations) + " law violations over " +
                               std::to_string(suite.size()) + " queries");
}

// --- 5 -------------------------------------------------------------------------

void witnesses(Criterion& c) {
  for (int i = 1; i <= 7; ++i) {
    const ImpossibilityWitness w = impossibility_witness(i);
    c.check(w.conflict_verified, w.id + ": conflict not verified");
  }
  for (const auto& w : compatibility_witnesses(builtin_suite(), 4)) {
    c.check(w.confirmed, w.profile.explainer + ": profile differs from the claimed axiom subset");
  }
}

// --- 6 -------------------------------------------------------------------------

constexpr ExplainerKind kAllKinds[] = {
    ExplainerKind::GNec, ExplainerKind::SNec, ExplainerKind::GSuf,
    ExplainerKind::SSuf, ExplainerKind::CSuf, ExplainerKind::Lwf,
    ExplainerKind::Lc,   ExplainerKind::Ld,   ExplainerKind::LdTau,
};

/// Candidates that contain a member of the kind whenever one exists in a
/// boolean theory. gNec is closed under nonempty subsets, so singletons
/// suffice. sNec members are x \ y. A member of gSuf or sSuf extends to a full
/// instance that is still a member (for sSuf, fill the free features with the
/// values opposite to x). Every remaining kind only yields CSRs, which are y \ x.
std::vector<oracle::Values> witness_candidates(ExplainerKind kind, const oracle::Values& x,
                                               const oracle::Universe& u) {
  std::vector<oracle::Values> out;
  switch (kind) {
    case ExplainerKind::GNec:
      for (std::size_t f = 0; f < x.size(); ++f) {
        for (ValueId v = 0; v < 2; ++v) {
          oracle::Values e(x.size(), -1);
          e[f] = v;
          out.push_back(e);
        }
      }
      break;
    case ExplainerKind::SNec:
      for (const auto& y : u.instances) out.push_back(oracle::minus(x, y));
      break;
    case ExplainerKind::GSuf:
    case ExplainerKind::SSuf: out = u.instances; break;
    default:
      for (const auto& y : u.instances) out.push_back(oracle::minus(y, x));
  }
  return out;
}

void sat_differential(Criterion& c) {
  std::mt19937_64 rng(20240601);
  auto counter = sat::SatOracle::builtin();
  std::array<std::size_t, 9> pairs{};
  std::array<std::size_t, 9> finds{};
  std::size_t theories = 0;
  for (; theories < 220; ++theories) {
    const std::size_t n = 3 + theories % 10;  // every size in [3, 12]
    const Classifier k = oracle::random_formula_classifier(rng, n, 2 + static_cast<int>(rng() % 4));
    const oracle::Universe u(k);
    const auto hamming = DistanceMeasure::hamming(n);
    const double tau = static_cast<double>(1 + rng() % n);
    for (int qi = 0; qi < 2; ++qi) {
      const oracle::Values xv = oracle::random_instance(rng, k.theory());
      const Query q = Query::create(k, Instance(oracle::make(xv)));
      for (std::size_t ki = 0; ki < std::size(kAllKinds); ++ki) {
        const ExplainerKind kind = kAllKinds[ki];
        const std::string name(to_string(kind));

        // DecideExp on random and structured candidates.
        std::vector<oracle::Values> cands;
        for (int j = 0; j < 2; ++j) cands.push_back(oracle::random_assignment(rng, k.theory()));
        const auto& y = u.instances[rng() % u.instances.size()];
        cands.push_back(oracle::minus(y, xv));
        cands.push_back(oracle::minus(xv, y));
        for (const auto& e : cands) {
          const auto pa = oracle::make(e);
          counter.reset_calls();
          const bool got = decide_exp(kind, q, pa, counter, &hamming, tau);
          const bool want = oracle::member_by_instances(kind, q, u, e, &hamming, tau);
          c.check(got == want, "decide_exp " + name + " disagrees on " + braced(k.theory(), pa) +
                                   " (n=" + std::to_string(n) + ")");
          ++pairs[ki];
        }

        // FindExp: a member, or none exactly when there is no member.
        counter.reset_calls();
        const auto found = find_exp(kind, q, counter, &hamming, tau);
        const std::size_t calls = counter.calls();
        ++finds[ki];
        if (found) {
          c.check(oracle::member_by_instances(kind, q, u, oracle::values_of(*found), &hamming, tau),
                  "find_exp " + name + " returned a non-member");
        } else {
          bool any = false;
          for (const auto& e : witness_candidates(kind, xv, u)) {
            if (oracle::member_by_instances(kind, q, u, e, &hamming, tau)) {
              any = true;
              break;
            }
          }
          c.check(!any, "find_exp " + name + " returned none but a member exists");
        }
        std::size_t budget = 0;
        switch (kind) {
          case ExplainerKind::SSuf: budget = 0; break;
          case ExplainerKind::CSuf:
          case ExplainerKind::GSuf:
          case ExplainerKind::SNec:
          case ExplainerKind::LdTau: budget = 1; break;
          case ExplainerKind::Ld: budget = static_cast<std::size_t>(-1); break;
          default: budget = n;
        }
        c.check(calls <= budget, "find_exp " + name + " used " + std::to_string(calls) +
                                     " oracle calls (budget " + std::to_string(budget) + ")");
      }
    }
  }
  c.check(theories >= 200, "fewer than 200 theories");
  for (std::size_t ki = 0; ki < pairs.size(); ++ki) {
    c.check(pairs[ki] >= 1000, std::string(to_string(kAllKinds[ki])) + ": only " +
                                   std::to_string(pairs[ki]) + " decide pairs");
  }
}

// --- 7 -------------------------------------------------------------------------

/// stdout of a shell command and its exit status.
std::pair<std::string, int> capture(const std::string& command) {
  std::FILE* pipe = ::popen(command.c_str(), "r");
  if (pipe == nullptr) return {"", -1};
  std::string out;
  char buf[4096];
  std::size_t got = 0;
  while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, got);
  const int status = ::pclose(pipe);
  return {out, WIFEXITED(status) ? WEXITSTATUS(status) : -1};
}

void determinism(Criterion& c) {
  const char* cli = std::getenv("CFX_CLI");
  c.check(cli != nullptr, "CFX_CLI is not set");
  if (cli == nullptr) return;
  const std::string base = std::string("'") + cli + "'";
  const std::vector<std::string> commands = {
      base + " audit --builtin --format json --jobs 1",
      base + " audit --builtin --format json --jobs 4",
      base + " witness --compat --format json",
  };
  const auto first = capture(commands[0]);
  c.check(first.second == 0 && !first.first.empty(), "audit run failed");
  c.check(capture(commands[0]).first == first.first, "two audit runs differ");
  c.check(capture(commands[1]).first == first.first, "audit output depends on --jobs");
  const auto w = capture(commands[2]);
  c.check(w.second == 0 && !w.first.empty(), "witness run failed");
  c.check(capture(commands[2]).first == w.first, "two witness runs differ");
}

}  // namespace

int main() {
  bool ok = true;
  ok &= Criterion(1, "golden Example 1").run(golden_example1, 1.0);
  ok &= Criterion(2, "appendix goldens").run(golden_appendix, 60.0);
  ok &= Criterion(3, "expected axiom table").run(table_conformance, 60.0);
  ok &= Criterion(4, "property suites").run(property_suites, 60.0);
  ok &= Criterion(5, "impossibility and compatibility witnesses").run(witnesses, 60.0);
  ok &= Criterion(6, "SAT differential").run(sat_differential, 120.0);
  ok &= Criterion(7, "determinism").run(determinism, 120.0);
  return ok ? 0 : 1;
}
