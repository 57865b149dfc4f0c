#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cfx/derived.hpp"

namespace cfx {

enum class AxiomId {
  Success,
  NonTriviality,
  Equivalence,
  Feasibility,
  Coreness,
  ScepticalValidity,
  Novelty,
  StrongValidity,
  WeakValidity,
};

inline constexpr std::array<AxiomId, 9> kAllAxioms = {
    AxiomId::Success,     AxiomId::NonTriviality,     AxiomId::Equivalence,
    AxiomId::Feasibility, AxiomId::Coreness,          AxiomId::ScepticalValidity,
    AxiomId::Novelty,     AxiomId::StrongValidity,    AxiomId::WeakValidity,
};

std::string_view to_string(AxiomId a);
std::optional<AxiomId> parse_axiom(std::string_view text);

struct ExplainerUnderTest {
  std::string name;
  std::function<ExplanationSet(const Query&)> fn;
};

/// Built-in explainers, uncapped. Ld and LdTau use Hamming distance.
ExplainerUnderTest builtin_explainer(ExplainerKind kind, double tau = kInfinity);
/// L0: always the empty set of explanations.
ExplainerUnderTest constant_empty();
/// L1: always {emptyset}.
ExplainerUnderTest constant_trivial();
/// L2: { x \ y : kappa(y) != kappa(x) }.
ExplainerUnderTest old_values();

/// An ordered, labelled list of queries. Queries over the same theory and the
/// same classifier function share an equivalence group, which is what the
/// Equivalence axiom compares within.
class QuerySuite {
 public:
  explicit QuerySuite(std::string descriptor = {}) : descriptor_(std::move(descriptor)) {}

  void add(Query q, std::string label);
  void append(const QuerySuite& other);

  const std::string& descriptor() const noexcept { return descriptor_; }
  void set_descriptor(std::string d) { descriptor_ = std::move(d); }
  std::size_t size() const noexcept { return queries_.size(); }
  const Query& query(std::size_t i) const { return queries_.at(i); }
  const std::string& label(std::size_t i) const { return labels_.at(i); }
  const std::vector<Query>& queries() const noexcept { return queries_; }
  std::size_t group(std::size_t i) const { return groups_.at(i); }

  /// The sub-suite made of the given query indices, in that order.
  QuerySuite subset(const std::vector<std::size_t>& indices) const;

 private:
  std::string descriptor_;
  std::vector<Query> queries_;
  std::vector<std::string> labels_;
  std::vector<std::size_t> groups_;
  std::vector<std::size_t> group_rep_;  // first query index of each group
};

struct Counterexample {
  std::size_t query = 0;
  /// Partner query for Equivalence.
  std::optional<std::size_t> other_query;
  std::optional<PartialAssignment> explanation;
  std::optional<Instance> witness;
  std::string detail;
};

/// "no-violation-found" over the suite when counterexample is empty.
struct Verdict {
  AxiomId axiom = AxiomId::Success;
  std::optional<Counterexample> counterexample;

  bool violated() const noexcept { return counterexample.has_value(); }
};

/// Outputs of L over the suite, in suite order, using up to `jobs` threads.
std::vector<ExplanationSet> run_explainer(const ExplainerUnderTest& l, const QuerySuite& suite,
                                          unsigned jobs = 1);

/// Checks one axiom over precomputed outputs. The counterexample is the
/// first violation in suite order.
Verdict check_axiom(AxiomId a, const QuerySuite& suite, const std::vector<ExplanationSet>& outputs);
Verdict check_axiom(AxiomId a, const ExplainerUnderTest& l, const QuerySuite& suite);

/// Why E breaks an element-wise axiom on q (NonTriviality, Feasibility,
/// Coreness, ScepticalValidity, Novelty, StrongValidity, WeakValidity), or
/// nullopt. `core` is Core(kappa(x)).
std::optional<Counterexample> element_violation(AxiomId a, const Query& q,
                                                const PartialAssignment& e,
                                                const PartialAssignment& core);

/// Re-runs the axiom on the counterexample's queries alone and reports whether
/// the violation reappears.
bool replay(AxiomId a, const Counterexample& cx, const ExplainerUnderTest& l,
            const QuerySuite& suite);

/// true = satisfied, in kAllAxioms order.
using AxiomRow = std::array<bool, 9>;

/// Known axiom rows for gNec, sNec, gSuf, sSuf, cSuf, and the exact profiles of
/// the constant explainers L0, L1 and L2.
std::optional<AxiomRow> expected_profile(std::string_view explainer);

struct AxiomProfile {
  std::string explainer;
  std::string suite;
  std::array<Verdict, 9> verdicts;
  std::optional<AxiomRow> expected;
  std::vector<AxiomId> mismatches;

  bool satisfied(AxiomId a) const { return !verdicts[static_cast<std::size_t>(a)].violated(); }
  AxiomRow row() const;
};

AxiomProfile audit(const ExplainerUnderTest& l, const QuerySuite& suite, unsigned jobs = 1);
AxiomProfile audit(const ExplainerUnderTest& l, const QuerySuite& suite,
                   const std::vector<ExplanationSet>& outputs, std::optional<AxiomRow> expected);

/// Pairs (antecedents, consequent) from the implication chains between axioms.
struct Implication {
  std::vector<AxiomId> antecedents;
  AxiomId consequent;
};
const std::vector<Implication>& axiom_implications();
/// Implications whose antecedents hold in the profile but whose consequent does not.
std::vector<Implication> broken_implications(const AxiomProfile& p);

// --- Families ----------------------------------------------------------------

enum class Family { GNec, SNec, GSuf, SSuf, CSuf };
inline constexpr std::array<Family, 5> kAllFamilies = {Family::GNec, Family::SNec, Family::GSuf,
                                                       Family::SSuf, Family::CSuf};
std::string_view to_string(Family f);

struct FamilyReport {
  /// L(Q) is contained in the family's set on every suite query.
  std::array<bool, 5> by_inclusion{};
  /// The characterising axioms all hold on the suite.
  std::array<bool, 5> by_axioms{};

  bool consistent() const { return by_inclusion == by_axioms; }
};

FamilyReport classify_family(const ExplainerUnderTest& l, const QuerySuite& suite,
                             unsigned jobs = 1);

// --- Impossibility and compatibility witnesses -------------------------------

struct ImpossibilityWitness {
  std::string id;  // "I1".."I7"
  std::vector<AxiomId> axioms;
  QuerySuite suite;  // one query, or two same-class queries when Equivalence is involved
  /// No explanation set satisfies the axioms on the suite.
  bool conflict_verified = false;
  std::vector<std::string> trace;
};

/// i in 1..7. Enumerates every candidate explanation on the witness queries.
ImpossibilityWitness impossibility_witness(int i);

struct CompatibilityWitness {
  std::vector<AxiomId> claimed;
  AxiomProfile profile;
  /// The profile satisfies exactly the claimed axioms.
  bool confirmed = false;
};

std::vector<CompatibilityWitness> compatibility_witnesses(const QuerySuite& suite,
                                                          unsigned jobs = 1);

// --- Suites -------------------------------------------------------------------

QuerySuite example1_suite();
QuerySuite appendix1_suite();
/// Only the query on x1.
QuerySuite appendix2_suite();
/// The concrete queries behind the impossibility witnesses.
QuerySuite witness_suite();

struct SuiteOptions {
  /// Maximum number of classifiers drawn from the exhaustive generator.
  std::size_t budget = 5000;
  std::uint64_t seed = 20240601;
};

/// Every query over every surjective two-class table classifier of every
/// two-feature theory with domain sizes in {2, 3}. Sampled with the seed when
/// the classifier count exceeds the budget.
QuerySuite exhaustive_suite(const SuiteOptions& options = {});

/// Example 1, both appendix examples, the witness queries and the exhaustive suite.
QuerySuite builtin_suite(const SuiteOptions& options = {});

}  // namespace cfx
