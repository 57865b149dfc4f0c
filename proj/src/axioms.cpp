#include "cfx/axioms.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <exception>
#include <map>
#include <mutex>
#include <random>
#include <thread>

#include "cfx/builtin.hpp"
#include "cfx/error.hpp"

namespace cfx {

namespace {

constexpr std::array<std::string_view, 9> kAxiomNames = {
    "Success", "NonTriviality", "Equivalence",    "Feasibility", "Coreness",
    "ScepticalValidity", "Novelty", "StrongValidity", "WeakValidity"};

constexpr std::array<std::string_view, 5> kFamilyNames = {"gNec", "sNec", "gSuf", "sSuf", "cSuf"};

std::size_t index(AxiomId a) { return static_cast<std::size_t>(a); }

AxiomRow row_of(std::initializer_list<AxiomId> satisfied) {
  AxiomRow r{};
  for (AxiomId a : satisfied) r[index(a)] = true;
  return r;
}

AxiomRow all_but(std::initializer_list<AxiomId> violated) {
  AxiomRow r;
  r.fill(true);
  for (AxiomId a : violated) r[index(a)] = false;
  return r;
}

std::vector<AxiomId> satisfied_list(const AxiomRow& r) {
  std::vector<AxiomId> out;
  for (AxiomId a : kAllAxioms) {
    if (r[index(a)]) out.push_back(a);
  }
  return out;
}

ClassId classify(const Query& q, const PartialAssignment& y) {
  return q.classifier().classify_values(y.values());
}

std::string theory_key(const Theory& t) {
  std::string key;
  for (const Feature& f : t.features()) {
    key += f.name + "{";
    for (const auto& v : f.domain) key += v + ",";
    key += "}";
  }
  key += "|";
  for (const auto& c : t.classes()) key += c + ",";
  return key;
}

/// First explanation in exactly one of the two sets.
std::optional<PartialAssignment> first_difference(const ExplanationSet& a,
                                                  const ExplanationSet& b) {
  for (const auto& e : a) {
    if (!b.contains(e)) return e;
  }
  for (const auto& e : b) {
    if (!a.contains(e)) return e;
  }
  return std::nullopt;
}

}  // namespace

std::string_view to_string(AxiomId a) { return kAxiomNames[index(a)]; }

std::optional<AxiomId> parse_axiom(std::string_view text) {
  auto lower = [](std::string_view s) {
    std::string out;
    for (char ch : s) {
      if (ch != '-' && ch != '_' && ch != ' ') {
        out += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
      }
    }
    return out;
  };
  for (AxiomId a : kAllAxioms) {
    if (lower(to_string(a)) == lower(text)) return a;
  }
  return std::nullopt;
}

std::string_view to_string(Family f) { return kFamilyNames[static_cast<std::size_t>(f)]; }

// --- Explainers ---------------------------------------------------------------

ExplainerUnderTest builtin_explainer(ExplainerKind kind, double tau) {
  return {std::string(to_string(kind)),
          [kind, tau](const Query& q) { return explain(kind, q, std::nullopt, nullptr, tau); }};
}

ExplainerUnderTest constant_empty() {
  return {"L0", [](const Query&) { return ExplanationSet("L0", {}); }};
}

ExplainerUnderTest constant_trivial() {
  return {"L1", [](const Query& q) {
            return ExplanationSet("L1", {PartialAssignment(q.theory().num_features())});
          }};
}

ExplainerUnderTest old_values() {
  return {"L2", [](const Query& q) {
            std::vector<PartialAssignment> out;
            for (const PartialAssignment& y : enumerate_instances(q.theory())) {
              if (classify(q, y) != q.label()) out.push_back(q.instance().minus(y));
            }
            return ExplanationSet("L2", std::move(out));
          }};
}

// --- Suites -------------------------------------------------------------------

void QuerySuite::add(Query q, std::string label) {
  const Classifier& k = q.classifier();
  std::size_t g = group_rep_.size();
  for (std::size_t i = 0; i < group_rep_.size(); ++i) {
    const Classifier& other = queries_[group_rep_[i]].classifier();
    if (k.shares_state(other)) {
      g = i;
      break;
    }
  }
  if (g == group_rep_.size()) {
    // Fall back to comparing functions; key on the theory text first to keep it cheap.
    const std::string key = theory_key(k.theory());
    for (std::size_t i = 0; i < group_rep_.size(); ++i) {
      const Classifier& other = queries_[group_rep_[i]].classifier();
      if (theory_key(other.theory()) == key && k.same_function(other)) {
        g = i;
        break;
      }
    }
  }
  if (g == group_rep_.size()) group_rep_.push_back(queries_.size());
  groups_.push_back(g);
  queries_.push_back(std::move(q));
  labels_.push_back(std::move(label));
}

void QuerySuite::append(const QuerySuite& other) {
  for (std::size_t i = 0; i < other.size(); ++i) add(other.query(i), other.label(i));
}

QuerySuite QuerySuite::subset(const std::vector<std::size_t>& indices) const {
  QuerySuite out(descriptor_ + " (subset)");
  for (std::size_t i : indices) out.add(query(i), label(i));
  return out;
}

QuerySuite example1_suite() {
  QuerySuite s("example1");
  for (int i = 1; i <= 9; ++i) s.add(builtin::example1_query(i), "example1/x" + std::to_string(i));
  return s;
}

QuerySuite appendix1_suite() {
  QuerySuite s("appendix1");
  const Classifier k = builtin::appendix1();
  std::uint64_t r = 0;
  for (const PartialAssignment& y : enumerate_instances(k.theory())) {
    s.add(Query::create(k, Instance(y)), "appendix1/x" + std::to_string(++r));
  }
  return s;
}

QuerySuite appendix2_suite() {
  QuerySuite s("appendix2");
  s.add(Query::create(builtin::appendix2(), builtin::instance({0, 0})), "appendix2/x1");
  return s;
}

QuerySuite witness_suite() {
  QuerySuite s("witnesses");
  const Classifier ab = builtin::two_by_three();
  s.add(Query::create(ab, builtin::instance({0, 0})), "two-by-three/z");
  s.add(Query::create(ab, builtin::instance({1, 1})), "two-by-three/w");
  const Classifier iff = builtin::equivalence_formula();
  s.add(Query::create(iff, builtin::instance({0, 0})), "iff/x");
  s.add(Query::create(iff, builtin::instance({1, 1})), "iff/y");
  const Classifier disj = builtin::disjunction_formula();
  s.add(Query::create(disj, builtin::instance({0, 1})), "or/x");
  s.add(Query::create(disj, builtin::instance({1, 0})), "or/y");
  return s;
}

QuerySuite exhaustive_suite(const SuiteOptions& options) {
  struct Entry {
    TheoryPtr theory;
    std::uint64_t mask;
  };
  std::vector<Entry> all;
  for (const TheoryPtr& t : builtin::two_feature_theories()) {
    const std::uint64_t n = t->instance_count();
    for (std::uint64_t mask = 1; mask + 1 < (std::uint64_t{1} << n); ++mask) all.push_back({t, mask});
  }
  std::vector<std::size_t> chosen(all.size());
  for (std::size_t i = 0; i < chosen.size(); ++i) chosen[i] = i;
  std::string descriptor = "exhaustive two-feature, domains {2,3}, " +
                           std::to_string(all.size()) + " surjective two-class tables";
  if (all.size() > options.budget) {
    std::mt19937_64 rng(options.seed);
    for (std::size_t i = 0; i < options.budget; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng() % (chosen.size() - i));
      std::swap(chosen[i], chosen[j]);
    }
    chosen.resize(options.budget);
    std::sort(chosen.begin(), chosen.end());
    descriptor += ", sampled " + std::to_string(options.budget) + " with seed " +
                  std::to_string(options.seed);
  }
  QuerySuite s(descriptor);
  for (std::size_t idx : chosen) {
    const Entry& e = all[idx];
    const std::uint64_t n = e.theory->instance_count();
    std::vector<ClassId> labels(n);
    for (std::uint64_t r = 0; r < n; ++r) labels[r] = (e.mask >> r) & 1;
    const Classifier k = Classifier::table(e.theory, std::move(labels));
    const std::string prefix = "exhaustive/" + std::to_string(e.theory->domain_size(0)) + "x" +
                               std::to_string(e.theory->domain_size(1)) + "/m" +
                               std::to_string(e.mask);
    for (std::uint64_t r = 0; r < n; ++r) {
      s.add(Query::create(k, instance_at(*e.theory, r)), prefix + "/r" + std::to_string(r));
    }
  }
  return s;
}

QuerySuite builtin_suite(const SuiteOptions& options) {
  QuerySuite s;
  s.append(example1_suite());
  s.append(appendix1_suite());
  s.append(appendix2_suite());
  s.append(witness_suite());
  const QuerySuite ex = exhaustive_suite(options);
  s.append(ex);
  s.set_descriptor("builtin: example1, appendix1, appendix2, witnesses, " + ex.descriptor());
  return s;
}

// --- Running and checking -----------------------------------------------------

std::vector<ExplanationSet> run_explainer(const ExplainerUnderTest& l, const QuerySuite& suite,
                                          unsigned jobs) {
  std::vector<ExplanationSet> out(suite.size());
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(suite.size())));
  if (jobs <= 1) {
    for (std::size_t i = 0; i < suite.size(); ++i) out[i] = l.fn(suite.query(i));
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= suite.size()) return;
      try {
        out[i] = l.fn(suite.query(i));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = suite.size();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

std::optional<Counterexample> element_violation(AxiomId a, const Query& q,
                                                const PartialAssignment& e,
                                                const PartialAssignment& core) {
  const Theory& t = q.theory();
  const Instance& x = q.instance();
  const ClassId c = q.label();
  auto fail = [&](std::string detail, std::optional<Instance> witness = std::nullopt) {
    Counterexample cx;
    cx.explanation = e;
    cx.witness = std::move(witness);
    cx.detail = std::move(detail);
    return std::optional<Counterexample>(std::move(cx));
  };
  switch (a) {
    case AxiomId::NonTriviality:
      if (e.empty()) return fail("the empty explanation is returned");
      return std::nullopt;
    case AxiomId::Feasibility:
      if (!e.subset_of(x)) return fail(braced(t, e.minus(x)) + " is not part of x");
      return std::nullopt;
    case AxiomId::Coreness:
      if (!e.subset_of(core)) {
        return fail(braced(t, e.minus(core)) + " is not core to class " +
                    t.class_name(c));
      }
      return std::nullopt;
    case AxiomId::ScepticalValidity:
      if (!e.subset_of(x)) return std::nullopt;  // x (-) E is empty
      for (const Instance& y : residual(t, x, e)) {
        if (classify(q, y) == c) {
          return fail("changing exactly these features can keep class " + t.class_name(c), y);
        }
      }
      return std::nullopt;
    case AxiomId::Novelty:
      if (!e.disjoint_with(x)) {
        return fail(braced(t, e.intersect(x)) + " already holds in x");
      }
      return std::nullopt;
    case AxiomId::StrongValidity:
      for (const PartialAssignment& y : extensions(t, e)) {
        if (classify(q, y) == c) {
          return fail("an instance containing E keeps class " + t.class_name(c), Instance(y));
        }
      }
      return std::nullopt;
    case AxiomId::WeakValidity: {
      Instance y = substitute(x, e);
      if (classify(q, y) == c) {
        return fail("applying E to x keeps class " + t.class_name(c), std::move(y));
      }
      return std::nullopt;
    }
    default:
      throw Error(ErrorCode::InvalidArgument,
                  std::string(to_string(a)) + " is not checked per explanation");
  }
}

Verdict check_axiom(AxiomId a, const QuerySuite& suite,
                    const std::vector<ExplanationSet>& outputs) {
  Verdict v;
  v.axiom = a;
  if (outputs.size() != suite.size()) {
    throw Error(ErrorCode::InvalidArgument, "one output per suite query is required");
  }
  if (a == AxiomId::Success) {
    for (std::size_t i = 0; i < suite.size(); ++i) {
      if (outputs[i].empty()) {
        v.counterexample = Counterexample{i, std::nullopt, std::nullopt, std::nullopt,
                                          "no explanation is returned"};
        return v;
      }
    }
    return v;
  }
  if (a == AxiomId::Equivalence) {
    std::map<std::pair<std::size_t, ClassId>, std::size_t> first;
    for (std::size_t i = 0; i < suite.size(); ++i) {
      const auto key = std::make_pair(suite.group(i), suite.query(i).label());
      auto [it, fresh] = first.emplace(key, i);
      if (fresh) continue;
      const std::size_t j = it->second;
      if (outputs[i].items() != outputs[j].items()) {
        Counterexample cx;
        cx.query = j;
        cx.other_query = i;
        cx.explanation = first_difference(outputs[j], outputs[i]);
        cx.detail = "two instances of class " +
                    suite.query(i).theory().class_name(suite.query(i).label()) +
                    " get different explanations";
        v.counterexample = std::move(cx);
        return v;
      }
    }
    return v;
  }
  for (std::size_t i = 0; i < suite.size(); ++i) {
    const Query& q = suite.query(i);
    std::optional<PartialAssignment> core;
    for (const auto& e : outputs[i]) {
      if (a == AxiomId::Coreness && !core) core = core_literals(q.classifier(), q.label());
      auto cx = element_violation(a, q, e, core ? *core : PartialAssignment());
      if (cx) {
        cx->query = i;
        v.counterexample = std::move(cx);
        return v;
      }
    }
  }
  return v;
}

Verdict check_axiom(AxiomId a, const ExplainerUnderTest& l, const QuerySuite& suite) {
  return check_axiom(a, suite, run_explainer(l, suite));
}

bool replay(AxiomId a, const Counterexample& cx, const ExplainerUnderTest& l,
            const QuerySuite& suite) {
  std::vector<std::size_t> idx{cx.query};
  if (cx.other_query) idx.push_back(*cx.other_query);
  return check_axiom(a, l, suite.subset(idx)).violated();
}

std::optional<AxiomRow> expected_profile(std::string_view explainer) {
  using A = AxiomId;
  if (explainer == "gNec") {
    return row_of({A::NonTriviality, A::Equivalence, A::Feasibility, A::Coreness,
                   A::ScepticalValidity});
  }
  if (explainer == "sNec") {
    return row_of({A::NonTriviality, A::Feasibility, A::ScepticalValidity});
  }
  if (explainer == "gSuf") {
    return row_of({A::Success, A::NonTriviality, A::Equivalence, A::ScepticalValidity,
                   A::StrongValidity, A::WeakValidity});
  }
  if (explainer == "sSuf") {
    return row_of({A::NonTriviality, A::ScepticalValidity, A::Novelty, A::StrongValidity,
                   A::WeakValidity});
  }
  if (explainer == "cSuf") {
    return row_of({A::Success, A::NonTriviality, A::ScepticalValidity, A::Novelty,
                   A::WeakValidity});
  }
  if (explainer == "L0") return all_but({A::Success});
  if (explainer == "L1") {
    return row_of({A::Success, A::Equivalence, A::Feasibility, A::Coreness, A::Novelty});
  }
  if (explainer == "L2") return row_of({A::Success, A::NonTriviality, A::Feasibility});
  return std::nullopt;
}

AxiomRow AxiomProfile::row() const {
  AxiomRow r{};
  for (AxiomId a : kAllAxioms) r[index(a)] = satisfied(a);
  return r;
}

AxiomProfile audit(const ExplainerUnderTest& l, const QuerySuite& suite,
                   const std::vector<ExplanationSet>& outputs, std::optional<AxiomRow> expected) {
  AxiomProfile p;
  p.explainer = l.name;
  p.suite = suite.descriptor();
  for (AxiomId a : kAllAxioms) p.verdicts[index(a)] = check_axiom(a, suite, outputs);
  p.expected = expected;
  if (expected) {
    for (AxiomId a : kAllAxioms) {
      if ((*expected)[index(a)] != p.satisfied(a)) p.mismatches.push_back(a);
    }
  }
  return p;
}

AxiomProfile audit(const ExplainerUnderTest& l, const QuerySuite& suite, unsigned jobs) {
  return audit(l, suite, run_explainer(l, suite, jobs), expected_profile(l.name));
}

const std::vector<Implication>& axiom_implications() {
  using A = AxiomId;
  static const std::vector<Implication> chains = {
      {{A::Coreness}, A::Feasibility},
      {{A::Coreness, A::NonTriviality}, A::ScepticalValidity},
      {{A::ScepticalValidity}, A::NonTriviality},
      {{A::WeakValidity}, A::NonTriviality},
      {{A::StrongValidity}, A::WeakValidity},
      {{A::Novelty, A::NonTriviality}, A::ScepticalValidity},
  };
  return chains;
}

std::vector<Implication> broken_implications(const AxiomProfile& p) {
  std::vector<Implication> out;
  for (const auto& imp : axiom_implications()) {
    const bool holds = std::all_of(imp.antecedents.begin(), imp.antecedents.end(),
                                   [&](AxiomId a) { return p.satisfied(a); });
    if (holds && !p.satisfied(imp.consequent)) out.push_back(imp);
  }
  return out;
}

FamilyReport classify_family(const ExplainerUnderTest& l, const QuerySuite& suite,
                             unsigned jobs) {
  const auto outputs = run_explainer(l, suite, jobs);
  FamilyReport r;
  r.by_inclusion.fill(true);
  for (std::size_t i = 0; i < suite.size(); ++i) {
    for (Family f : kAllFamilies) {
      auto& tag = r.by_inclusion[static_cast<std::size_t>(f)];
      if (!tag || outputs[i].empty()) continue;
      const auto kind = static_cast<ExplainerKind>(static_cast<std::size_t>(f));
      tag = outputs[i].subset_of(explain_core(kind, suite.query(i)));
    }
  }
  const AxiomProfile p = audit(l, suite, outputs, std::nullopt);
  using A = AxiomId;
  r.by_axioms = {p.satisfied(A::Coreness) && p.satisfied(A::NonTriviality),
                 p.satisfied(A::Feasibility) && p.satisfied(A::ScepticalValidity),
                 p.satisfied(A::StrongValidity),
                 p.satisfied(A::Novelty) && p.satisfied(A::StrongValidity),
                 p.satisfied(A::Novelty) && p.satisfied(A::WeakValidity)};
  return r;
}

// --- Impossibility and compatibility witnesses -------------------------------

ImpossibilityWitness impossibility_witness(int i) {
  using A = AxiomId;
  ImpossibilityWitness w;
  w.id = "I" + std::to_string(i);
  switch (i) {
    case 1:
      w.axioms = {A::Success, A::NonTriviality, A::Coreness};
      w.suite.add(builtin::example1_query(2), "example1/x2");
      break;
    case 2:
      w.axioms = {A::Success, A::Feasibility, A::ScepticalValidity};
      w.suite.add(Query::create(builtin::two_by_three(), builtin::instance({0, 0})),
                  "two-by-three/z");
      break;
    case 3:
      w.axioms = {A::Success, A::Novelty, A::StrongValidity};
      w.suite.add(Query::create(builtin::two_by_three(), builtin::instance({1, 1})),
                  "two-by-three/w");
      break;
    case 4:
      w.axioms = {A::Success, A::NonTriviality, A::Feasibility, A::Novelty};
      w.suite.add(builtin::example1_query(1), "example1/x1");
      break;
    case 5:
      w.axioms = {A::Success, A::Feasibility, A::WeakValidity};
      w.suite.add(builtin::example1_query(1), "example1/x1");
      break;
    case 6:
      w.axioms = {A::Success, A::NonTriviality, A::Equivalence, A::Feasibility};
      w.suite.add(builtin::example1_query(2), "example1/x2");
      w.suite.add(builtin::example1_query(4), "example1/x4");
      break;
    case 7:
      w.axioms = {A::Success, A::NonTriviality, A::Equivalence, A::Novelty};
      w.suite.add(Query::create(builtin::equivalence_formula(), builtin::instance({0, 0})),
                  "iff/x");
      w.suite.add(Query::create(builtin::equivalence_formula(), builtin::instance({1, 1})),
                  "iff/y");
      break;
    default: throw Error(ErrorCode::InvalidArgument, "impossibility sets are I1..I7");
  }
  w.suite.set_descriptor(w.id + " witness");

  const bool equivalence =
      std::find(w.axioms.begin(), w.axioms.end(), A::Equivalence) != w.axioms.end();
  std::vector<AxiomId> per_element;
  for (AxiomId a : w.axioms) {
    if (a != A::Success && a != A::Equivalence) per_element.push_back(a);
  }
  auto axioms_text = [&] {
    std::string s;
    for (AxiomId a : w.axioms) s += (s.empty() ? "" : ", ") + std::string(to_string(a));
    return s;
  };

  if (equivalence) {
    const Query& q0 = w.suite.query(0);
    const Query& q1 = w.suite.query(1);
    const bool paired = w.suite.group(0) == w.suite.group(1) && q0.label() == q1.label();
    w.trace.push_back(w.suite.label(0) + " and " + w.suite.label(1) + " share classifier and class " +
                      q0.theory().class_name(q0.label()) + (paired ? "" : " (NOT)") +
                      ", so Equivalence forces one common explanation set");
    if (!paired) return w;
  }

  std::vector<PartialAssignment> candidates;
  for (const auto& e : enumerate_partial_assignments(w.suite.query(0).theory())) {
    candidates.push_back(e);
  }
  std::sort(candidates.begin(), candidates.end(), canonical_less);

  std::vector<PartialAssignment> cores;
  for (std::size_t j = 0; j < w.suite.size(); ++j) {
    const Query& q = w.suite.query(j);
    cores.push_back(core_literals(q.classifier(), q.label()));
  }

  std::size_t admissible = 0;
  for (const auto& e : candidates) {
    std::string reason;
    for (std::size_t j = 0; j < w.suite.size() && reason.empty(); ++j) {
      for (AxiomId a : per_element) {
        if (auto cx = element_violation(a, w.suite.query(j), e, cores[j])) {
          reason = "violates " + std::string(to_string(a)) + " on " + w.suite.label(j) + ": " +
                   cx->detail;
          if (cx->witness) {
            reason += " (witness " + braced(w.suite.query(j).theory(), *cx->witness) + ")";
          }
          break;
        }
      }
    }
    const std::string name = braced(w.suite.query(0).theory(), e);
    if (reason.empty()) {
      ++admissible;
      w.trace.push_back(name + " admissible");
    } else {
      w.trace.push_back(name + " " + reason);
    }
  }
  w.conflict_verified = admissible == 0;
  w.trace.push_back(w.conflict_verified
                        ? "no candidate survives, so no nonempty explanation set satisfies " +
                              axioms_text()
                        : std::to_string(admissible) + " candidate(s) survive; no conflict");
  return w;
}

std::vector<CompatibilityWitness> compatibility_witnesses(const QuerySuite& suite, unsigned jobs) {
  using A = AxiomId;
  const std::vector<std::pair<ExplainerUnderTest, AxiomRow>> claims = {
      {constant_empty(), all_but({A::Success})},
      {constant_trivial(),
       row_of({A::Success, A::Equivalence, A::Feasibility, A::Coreness, A::Novelty})},
      {builtin_explainer(ExplainerKind::GSuf),
       row_of({A::Success, A::NonTriviality, A::Equivalence, A::ScepticalValidity,
               A::StrongValidity, A::WeakValidity})},
      {old_values(), row_of({A::Success, A::NonTriviality, A::Feasibility})},
      {builtin_explainer(ExplainerKind::CSuf),
       row_of({A::Success, A::NonTriviality, A::ScepticalValidity, A::Novelty, A::WeakValidity})},
  };
  std::vector<CompatibilityWitness> out;
  for (const auto& [l, row] : claims) {
    CompatibilityWitness w;
    w.claimed = satisfied_list(row);
    w.profile = audit(l, suite, run_explainer(l, suite, jobs), row);
    w.confirmed = w.profile.mismatches.empty();
    out.push_back(std::move(w));
  }
  return out;
}

}  // namespace cfx
