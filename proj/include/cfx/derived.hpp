#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cfx/explain.hpp"

namespace cfx {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// A distance on F(T). Hamming and weighted distances are separable: the
/// distance is the sum, in feature order, of the weights of the features on
/// which the instances differ. Only separable measures have a SAT encoding.
class DistanceMeasure {
 public:
  using Fn = std::function<double(const PartialAssignment&, const PartialAssignment&)>;

  static DistanceMeasure hamming(std::size_t num_features);
  /// Throws InvalidArgument on a negative or non-finite weight.
  static DistanceMeasure weighted(std::vector<double> weights);
  /// 0 on identical instances, `value` otherwise.
  static DistanceMeasure constant(double value = 1.0);
  static DistanceMeasure custom(std::string name, Fn fn);

  double operator()(const PartialAssignment& a, const PartialAssignment& b) const {
    return fn_(a, b);
  }
  const std::string& name() const noexcept { return name_; }
  /// Per-feature weights when separable.
  const std::optional<std::vector<double>>& weights() const noexcept { return weights_; }

 private:
  DistanceMeasure(std::string name, Fn fn, std::optional<std::vector<double>> weights)
      : name_(std::move(name)), fn_(std::move(fn)), weights_(std::move(weights)) {}

  std::string name_;
  Fn fn_;
  std::optional<std::vector<double>> weights_;
};

/// E is a credulous sufficient reason: E shares no literal with x and
/// kappa(x with E substituted) != kappa(x).
bool is_csr(const Query& q, const PartialAssignment& e);

// --- Derived explainers -----------------------------------------------------
//
// Candidates are restricted to novel literals (E shares nothing with x), so
// every output is a CSR.

/// CSRs with no CSR over a strictly smaller feature set.
ExplanationSet l_wf(const Query& q);
/// CSRs of minimum cardinality.
ExplanationSet l_c(const Query& q);
/// CSRs minimising dd(x with E substituted, x); all ties.
ExplanationSet l_d(const Query& q, const DistanceMeasure& dd);
/// CSRs with dd(x with E substituted, x) < tau.
ExplanationSet l_d_tau(const Query& q, const DistanceMeasure& dd, double tau);

/// Membership in the derived explainers, decided from the definitions by
/// enumeration over E(T). `dd` is required for Ld and LdTau.
bool is_member_derived(ExplainerKind kind, const Query& q, const PartialAssignment& e,
                       const DistanceMeasure* dd = nullptr, double tau = kInfinity);

// --- Weightings and rankings ------------------------------------------------

struct Weighting {
  std::string name;
  std::function<double(const PartialAssignment&)> fn;

  double operator()(const PartialAssignment& e) const { return fn(e); }
};

/// 1 on CSRs, +inf otherwise.
Weighting weighting_delta(const Query& q);
/// |E| on CSRs, +inf otherwise.
Weighting weighting_sigma(const Query& q);
/// dd(x with E substituted, x) on CSRs, +inf otherwise.
Weighting weighting_gamma(const Query& q, const DistanceMeasure& dd);

/// A preorder on E(T): geq(a, b) reads "a is at least as good as b".
struct Ranking {
  std::string name;
  std::function<bool(const PartialAssignment&, const PartialAssignment&)> geq;

  bool strictly_better(const PartialAssignment& a, const PartialAssignment& b) const {
    return geq(a, b) && !geq(b, a);
  }
};

enum class RankingMode {
  /// a >= b iff w(a) <= w(b).
  MinIsBetter,
  /// a >= b iff w(a) == w(b) and Feat(a) is a subset of Feat(b), or w(a) < w(b).
  DeltaFeatureRefined,
};

Ranking ranking_from_weighting(Weighting w, RankingMode mode);

/// Maximal elements of E(T) under r, by pairwise comparison. With
/// `verify_preorder`, reflexivity and transitivity are first checked
/// exhaustively and NotAPreorder is thrown on a violation.
ExplanationSet faithful_max(const Query& q, const Ranking& r, bool verify_preorder = true,
                            std::string kind = "max");

struct FaithfulnessVerdict {
  bool ok = true;
  /// (CSR, non-CSR) pair where the CSR is not strictly preferred.
  std::optional<std::pair<PartialAssignment, PartialAssignment>> counterexample;
};

/// Checks that every CSR is strictly preferred to every non-CSR.
FaithfulnessVerdict is_faithful(const std::function<Ranking(const Query&)>& rk, const Query& q);

/// Any explainer kind, core or derived. Core kinds honour `cap`; derived
/// kinds need `dd` for Ld/LdTau (Hamming when null).
ExplanationSet explain(ExplainerKind kind, const Query& q, Cap cap = std::nullopt,
                       const DistanceMeasure* dd = nullptr, double tau = kInfinity);

}  // namespace cfx
