#include "cfx/derived.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "cfx/error.hpp"

namespace cfx {

namespace {

constexpr std::size_t kMaxMaskFeatures = 26;

ClassId classify(const Query& q, const PartialAssignment& y) {
  return q.classifier().classify_values(y.values());
}

std::uint32_t feature_mask(const PartialAssignment& e) {
  std::uint32_t m = 0;
  for (FeatureId f = 0; f < e.arity(); ++f) {
    if (e.has(f)) m |= std::uint32_t{1} << f;
  }
  return m;
}

std::vector<PartialAssignment> all_csrs(const Query& q) {
  const ExplanationSet s = c_suf(q);
  return {s.begin(), s.end()};
}

ExplanationSet make(ExplainerKind kind, std::vector<PartialAssignment> items) {
  return ExplanationSet(std::string(to_string(kind)), std::move(items));
}

const DistanceMeasure& require_distance(const DistanceMeasure* dd) {
  if (!dd) throw Error(ErrorCode::InvalidArgument, "this explainer needs a distance measure");
  return *dd;
}

std::vector<PartialAssignment> materialize(const Theory& t) {
  std::vector<PartialAssignment> out;
  out.reserve(t.partial_assignment_count());
  for (const PartialAssignment& e : enumerate_partial_assignments(t)) out.push_back(e);
  return out;
}

}  // namespace

DistanceMeasure DistanceMeasure::hamming(std::size_t num_features) {
  return weighted(std::vector<double>(num_features, 1.0));
}

DistanceMeasure DistanceMeasure::weighted(std::vector<double> weights) {
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw Error(ErrorCode::InvalidArgument, "feature weights must be finite and non-negative");
    }
  }
  const bool unit = std::all_of(weights.begin(), weights.end(), [](double w) { return w == 1.0; });
  Fn fn = [weights](const PartialAssignment& a, const PartialAssignment& b) {
    double sum = 0.0;
    for (FeatureId f = 0; f < weights.size(); ++f) {
      if (a.value(f) != b.value(f)) sum += weights[f];
    }
    return sum;
  };
  return DistanceMeasure(unit ? "hamming" : "weighted", std::move(fn), std::move(weights));
}

DistanceMeasure DistanceMeasure::constant(double value) {
  Fn fn = [value](const PartialAssignment& a, const PartialAssignment& b) {
    return a == b ? 0.0 : value;
  };
  return DistanceMeasure("constant", std::move(fn), std::nullopt);
}

DistanceMeasure DistanceMeasure::custom(std::string name, Fn fn) {
  return DistanceMeasure(std::move(name), std::move(fn), std::nullopt);
}

bool is_csr(const Query& q, const PartialAssignment& e) {
  return e.disjoint_with(q.instance()) && classify(q, substitute(q.instance(), e)) != q.label();
}

ExplanationSet l_wf(const Query& q) {
  const std::size_t n = q.theory().num_features();
  if (n > kMaxMaskFeatures) throw Error(ErrorCode::InvalidArgument, "too many features");
  const auto csrs = all_csrs(q);
  const std::size_t full = std::size_t{1} << n;
  // below[m]: some CSR has a feature set contained in m.
  std::vector<char> below(full, 0);
  for (const auto& e : csrs) below[feature_mask(e)] = 1;
  for (std::size_t bit = 0; bit < n; ++bit) {
    for (std::size_t m = 0; m < full; ++m) {
      if ((m >> bit) & 1) below[m] = below[m] || below[m ^ (std::size_t{1} << bit)];
    }
  }
  std::vector<PartialAssignment> out;
  for (const auto& e : csrs) {
    const std::uint32_t m = feature_mask(e);
    bool minimal = true;
    for (std::size_t bit = 0; bit < n && minimal; ++bit) {
      if ((m >> bit) & 1 && below[m ^ (std::uint32_t{1} << bit)]) minimal = false;
    }
    if (minimal) out.push_back(e);
  }
  return make(ExplainerKind::Lwf, std::move(out));
}

ExplanationSet l_c(const Query& q) {
  const auto csrs = all_csrs(q);
  std::vector<PartialAssignment> out;
  // Canonical order puts the smallest first.
  for (const auto& e : csrs) {
    if (e.size() != csrs.front().size()) break;
    out.push_back(e);
  }
  return make(ExplainerKind::Lc, std::move(out));
}

ExplanationSet l_d(const Query& q, const DistanceMeasure& dd) {
  const auto csrs = all_csrs(q);
  std::vector<double> dist;
  dist.reserve(csrs.size());
  for (const auto& e : csrs) dist.push_back(dd(substitute(q.instance(), e), q.instance()));
  const double best = *std::min_element(dist.begin(), dist.end());
  std::vector<PartialAssignment> out;
  for (std::size_t i = 0; i < csrs.size(); ++i) {
    if (dist[i] == best) out.push_back(csrs[i]);
  }
  return make(ExplainerKind::Ld, std::move(out));
}

ExplanationSet l_d_tau(const Query& q, const DistanceMeasure& dd, double tau) {
  std::vector<PartialAssignment> out;
  for (const auto& e : all_csrs(q)) {
    if (dd(substitute(q.instance(), e), q.instance()) < tau) out.push_back(e);
  }
  return make(ExplainerKind::LdTau, std::move(out));
}

bool is_member_derived(ExplainerKind kind, const Query& q, const PartialAssignment& e,
                       const DistanceMeasure* dd, double tau) {
  if (!e.valid_for(q.theory())) {
    throw Error(ErrorCode::TheoryMismatch, "explanation is not over the query's theory");
  }
  if (is_core_kind(kind)) return is_member(kind, q, e);
  if (!is_csr(q, e)) return false;
  const Instance& x = q.instance();
  const ClassId c = q.label();
  // Every flipping E' yields the instance x with E' substituted, and every
  // other-class instance y arises from E' = y \ x, so quantifying over the
  // other-class instances covers all competing E'.
  switch (kind) {
    case ExplainerKind::Lwf:
      for (const PartialAssignment& y : enumerate_instances(q.theory())) {
        if (classify(q, y) == c) continue;
        const PartialAssignment diff = y.minus(x);
        if (diff.features_subset_of(e) && diff.size() < e.size()) return false;
      }
      return true;
    case ExplainerKind::Lc:
      for (const PartialAssignment& y : enumerate_instances(q.theory())) {
        if (classify(q, y) != c && y.minus(x).size() < e.size()) return false;
      }
      return true;
    case ExplainerKind::Ld: {
      const DistanceMeasure& d = require_distance(dd);
      const double mine = d(substitute(x, e), x);
      for (const PartialAssignment& y : enumerate_instances(q.theory())) {
        if (classify(q, y) != c && d(y, x) < mine) return false;
      }
      return true;
    }
    case ExplainerKind::LdTau: return require_distance(dd)(substitute(x, e), x) < tau;
    default: return false;
  }
}

Weighting weighting_delta(const Query& q) {
  return {"delta", [q](const PartialAssignment& e) { return is_csr(q, e) ? 1.0 : kInfinity; }};
}

Weighting weighting_sigma(const Query& q) {
  return {"sigma", [q](const PartialAssignment& e) {
            return is_csr(q, e) ? static_cast<double>(e.size()) : kInfinity;
          }};
}

Weighting weighting_gamma(const Query& q, const DistanceMeasure& dd) {
  return {"gamma", [q, dd](const PartialAssignment& e) {
            return is_csr(q, e) ? dd(substitute(q.instance(), e), q.instance()) : kInfinity;
          }};
}

Ranking ranking_from_weighting(Weighting w, RankingMode mode) {
  if (mode == RankingMode::MinIsBetter) {
    return {w.name, [w](const PartialAssignment& a, const PartialAssignment& b) {
              return w(a) <= w(b);
            }};
  }
  return {w.name + "-feature", [w](const PartialAssignment& a, const PartialAssignment& b) {
            const double wa = w(a);
            const double wb = w(b);
            return wa < wb || (wa == wb && a.features_subset_of(b));
          }};
}

ExplanationSet faithful_max(const Query& q, const Ranking& r, bool verify_preorder,
                            std::string kind) {
  const auto all = materialize(q.theory());
  const std::size_t n = all.size();
  const std::size_t words = (n + 63) / 64;
  std::vector<std::uint64_t> geq(n * words, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (r.geq(all[i], all[j])) geq[i * words + j / 64] |= std::uint64_t{1} << (j % 64);
    }
  }
  auto at = [&](std::size_t i, std::size_t j) { return (geq[i * words + j / 64] >> (j % 64)) & 1; };

  if (verify_preorder) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!at(i, i)) throw Error(ErrorCode::NotAPreorder, r.name + " is not reflexive");
    }
    // Transitivity: whenever i >= j, everything below j is below i.
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (!at(i, j)) continue;
        for (std::size_t w = 0; w < words; ++w) {
          if (geq[j * words + w] & ~geq[i * words + w]) {
            throw Error(ErrorCode::NotAPreorder, r.name + " is not transitive");
          }
        }
      }
    }
  }

  std::vector<PartialAssignment> out;
  for (std::size_t i = 0; i < n; ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < n && !dominated; ++j) dominated = at(j, i) && !at(i, j);
    if (!dominated) out.push_back(all[i]);
  }
  return ExplanationSet(std::move(kind), std::move(out));
}

FaithfulnessVerdict is_faithful(const std::function<Ranking(const Query&)>& rk, const Query& q) {
  const Ranking r = rk(q);
  std::vector<PartialAssignment> csr;
  std::vector<PartialAssignment> other;
  for (const PartialAssignment& e : enumerate_partial_assignments(q.theory())) {
    (is_csr(q, e) ? csr : other).push_back(e);
  }
  for (const auto& a : csr) {
    for (const auto& b : other) {
      if (!r.strictly_better(a, b)) return {false, std::make_pair(a, b)};
    }
  }
  return {};
}

ExplanationSet explain(ExplainerKind kind, const Query& q, Cap cap, const DistanceMeasure* dd,
                       double tau) {
  if (is_core_kind(kind)) return explain_core(kind, q, cap);
  std::optional<DistanceMeasure> hamming;
  if (!dd && (kind == ExplainerKind::Ld || kind == ExplainerKind::LdTau)) {
    hamming = DistanceMeasure::hamming(q.theory().num_features());
    dd = &*hamming;
  }
  ExplanationSet full;
  switch (kind) {
    case ExplainerKind::Lwf: full = l_wf(q); break;
    case ExplainerKind::Lc: full = l_c(q); break;
    case ExplainerKind::Ld: full = l_d(q, *dd); break;
    default: full = l_d_tau(q, *dd, tau); break;
  }
  if (!cap || full.size() <= *cap) return full;
  std::vector<PartialAssignment> kept(full.begin(), full.begin() + static_cast<long>(*cap));
  return ExplanationSet(full.kind(), std::move(kept), true);
}

}  // namespace cfx
