#include "cfx/explain.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "cfx/error.hpp"

namespace cfx {

namespace {

constexpr std::array<std::string_view, 9> kKindNames = {"gNec", "sNec", "gSuf", "sSuf", "cSuf",
                                                        "Lwf",  "Lc",   "Ld",   "LdTau"};

/// Upper bound on |E(T)| for the tabulated sufficiency check.
constexpr std::uint64_t kMaxTabulatedAssignments = std::uint64_t{1} << 26;

class Collector {
 public:
  explicit Collector(Cap cap) : cap_(cap) {}

  /// Returns false once the cap is exceeded, which stops the enumeration.
  bool add(const PartialAssignment& e) {
    if (cap_ && items_.size() >= *cap_) {
      truncated_ = true;
      return false;
    }
    items_.push_back(e);
    return true;
  }

  ExplanationSet finish(ExplainerKind kind) {
    return ExplanationSet(std::string(to_string(kind)), std::move(items_), truncated_);
  }

 private:
  Cap cap_;
  std::vector<PartialAssignment> items_;
  bool truncated_ = false;
};

std::vector<std::vector<ValueId>> all_values(const Theory& t) {
  std::vector<std::vector<ValueId>> out(t.num_features());
  for (FeatureId f = 0; f < t.num_features(); ++f) {
    for (ValueId v = 0; v < static_cast<ValueId>(t.domain_size(f)); ++v) out[f].push_back(v);
  }
  return out;
}

std::vector<std::vector<ValueId>> novel_values(const Theory& t, const Instance& x) {
  auto out = all_values(t);
  for (FeatureId f = 0; f < t.num_features(); ++f) std::erase(out[f], x.value(f));
  return out;
}

ClassId classify(const Query& q, const PartialAssignment& y) {
  return q.classifier().classify_values(y.values());
}

/// same_below[i] is set when some instance extending the i-th partial
/// assignment has class c. Index digits: 0 for absent, v + 1 for value v;
/// feature 0 is the most significant digit.
class ExtensionTable {
 public:
  ExtensionTable(const Query& q, ClassId c) : theory_(q.theory()) {
    const std::size_t n = theory_.num_features();
    if (theory_.partial_assignment_count() > kMaxTabulatedAssignments) {
      throw Error(ErrorCode::InvalidArgument, "theory too large for enumeration");
    }
    weight_.assign(n, 1);
    for (std::size_t f = n; f-- > 1;) weight_[f - 1] = weight_[f] * (theory_.domain_size(f) + 1);
    const std::uint64_t total = theory_.partial_assignment_count();
    same_.assign(total, 0);

    // Extensions have larger indices, so a descending sweep sees them first.
    std::vector<ValueId> digits(n);
    for (FeatureId f = 0; f < n; ++f) digits[f] = static_cast<ValueId>(theory_.domain_size(f));
    std::vector<ValueId> values(n);
    for (std::uint64_t idx = total; idx-- > 0;) {
      std::size_t absent = n;
      for (FeatureId f = 0; f < n; ++f) {
        if (digits[f] == 0 && absent == n) absent = f;
        values[f] = digits[f] - 1;
      }
      if (absent == n) {
        same_[idx] = q.classifier().classify_values(values) == c;
      } else {
        char any = 0;
        for (std::size_t v = 0; v < theory_.domain_size(absent) && !any; ++v) {
          any = same_[idx + (v + 1) * weight_[absent]];
        }
        same_[idx] = any;
      }
      // Decrement the mixed-radix counter.
      for (std::size_t f = n; f-- > 0;) {
        if (digits[f] > 0) {
          --digits[f];
          break;
        }
        digits[f] = static_cast<ValueId>(theory_.domain_size(f));
      }
    }
  }

  bool some_extension_same(const PartialAssignment& e) const {
    std::uint64_t idx = 0;
    for (FeatureId f = 0; f < theory_.num_features(); ++f) {
      idx += static_cast<std::uint64_t>(e.value(f) + 1) * weight_[f];
    }
    return same_[idx] != 0;
  }

 private:
  const Theory& theory_;
  std::vector<std::uint64_t> weight_;
  std::vector<char> same_;
};

void require_theory(const Query& q, const PartialAssignment& e) {
  if (!e.valid_for(q.theory())) {
    throw Error(ErrorCode::TheoryMismatch, "explanation is not over the query's theory");
  }
}

}  // namespace

std::string_view to_string(ExplainerKind kind) { return kKindNames[static_cast<std::size_t>(kind)]; }

std::optional<ExplainerKind> parse_kind(std::string_view text) {
  std::string lowered;
  for (char ch : text) {
    if (ch == '-' || ch == '_') continue;
    lowered += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  }
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    std::string name;
    for (char ch : kKindNames[i]) name += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    if (name == lowered) return static_cast<ExplainerKind>(i);
  }
  return std::nullopt;
}

bool is_core_kind(ExplainerKind kind) noexcept {
  return static_cast<std::size_t>(kind) <= static_cast<std::size_t>(ExplainerKind::CSuf);
}

ExplanationSet::ExplanationSet(std::string kind, std::vector<PartialAssignment> items,
                               bool truncated)
    : kind_(std::move(kind)), items_(std::move(items)), truncated_(truncated) {
  std::sort(items_.begin(), items_.end(), canonical_less);
  items_.erase(std::unique(items_.begin(), items_.end()), items_.end());
}

bool ExplanationSet::contains(const PartialAssignment& e) const {
  return std::binary_search(items_.begin(), items_.end(), e, canonical_less);
}

bool ExplanationSet::subset_of(const ExplanationSet& other) const {
  return std::all_of(items_.begin(), items_.end(),
                     [&](const PartialAssignment& e) { return other.contains(e); });
}

void for_each_canonical(const std::vector<std::vector<ValueId>>& choices,
                        const std::function<bool(const PartialAssignment&)>& visit,
                        std::size_t min_size, std::size_t max_size) {
  const std::size_t n = choices.size();
  std::vector<std::size_t> suffix(n + 1, 0);  // coverable features at index >= f
  for (std::size_t f = n; f-- > 0;) suffix[f] = suffix[f + 1] + (choices[f].empty() ? 0 : 1);
  PartialAssignment current(n);
  bool stopped = false;

  auto rec = [&](auto& self, std::size_t start, std::size_t remaining) -> void {
    if (remaining == 0) {
      if (!visit(current)) stopped = true;
      return;
    }
    for (std::size_t f = start; f < n && suffix[f] >= remaining && !stopped; ++f) {
      for (ValueId v : choices[f]) {
        current.set(f, v);
        self(self, f + 1, remaining - 1);
        if (stopped) break;
      }
      current.erase(f);
    }
  };

  const std::size_t top = std::min(max_size, suffix[0]);
  for (std::size_t k = min_size; k <= top && !stopped; ++k) rec(rec, 0, k);
}

ClassId label_of(const Query& q, const PartialAssignment& y) { return classify(q, y); }

ExplanationSet g_nec(const Query& q, Cap cap) {
  const PartialAssignment core = core_literals(q.classifier(), q.label());
  std::vector<std::vector<ValueId>> choices(q.theory().num_features());
  for (const Literal& l : core.literals()) choices[l.feature] = {l.value};
  Collector out(cap);
  for_each_canonical(choices, [&](const PartialAssignment& e) { return out.add(e); }, 1);
  return out.finish(ExplainerKind::GNec);
}

ExplanationSet s_nec(const Query& q, Cap cap) {
  const Theory& t = q.theory();
  const Instance& x = q.instance();
  std::vector<std::vector<ValueId>> choices(t.num_features());
  for (FeatureId f = 0; f < t.num_features(); ++f) choices[f] = {x.value(f)};
  const auto novel = novel_values(t, x);
  Collector out(cap);
  for_each_canonical(
      choices,
      [&](const PartialAssignment& e) {
        // x (-) E: differ from x on exactly Feat(E).
        std::vector<std::vector<ValueId>> ys(t.num_features());
        for (FeatureId f = 0; f < t.num_features(); ++f) {
          ys[f] = e.has(f) ? novel[f] : std::vector<ValueId>{x.value(f)};
        }
        for (const PartialAssignment& y : AssignmentRange(std::move(ys))) {
          if (classify(q, y) == q.label()) return true;
        }
        return out.add(e);
      },
      1);
  return out.finish(ExplainerKind::SNec);
}

ExplanationSet g_suf(const Query& q, Cap cap) {
  const ExtensionTable table(q, q.label());
  Collector out(cap);
  for_each_canonical(all_values(q.theory()), [&](const PartialAssignment& e) {
    return table.some_extension_same(e) || out.add(e);
  });
  return out.finish(ExplainerKind::GSuf);
}

ExplanationSet s_suf(const Query& q, Cap cap) {
  const ExtensionTable table(q, q.label());
  Collector out(cap);
  for_each_canonical(novel_values(q.theory(), q.instance()), [&](const PartialAssignment& e) {
    return table.some_extension_same(e) || out.add(e);
  });
  return out.finish(ExplainerKind::SSuf);
}

ExplanationSet c_suf(const Query& q, Cap cap) {
  const Instance& x = q.instance();
  Collector out(cap);
  for_each_canonical(
      novel_values(q.theory(), x),
      [&](const PartialAssignment& e) {
        return classify(q, substitute(x, e)) == q.label() || out.add(e);
      },
      1);
  return out.finish(ExplainerKind::CSuf);
}

ExplanationSet explain_core(ExplainerKind kind, const Query& q, Cap cap) {
  switch (kind) {
    case ExplainerKind::GNec: return g_nec(q, cap);
    case ExplainerKind::SNec: return s_nec(q, cap);
    case ExplainerKind::GSuf: return g_suf(q, cap);
    case ExplainerKind::SSuf: return s_suf(q, cap);
    case ExplainerKind::CSuf: return c_suf(q, cap);
    default:
      throw Error(ErrorCode::InvalidArgument,
                  std::string(to_string(kind)) + " is not one of the five core explainers");
  }
}

bool is_member(ExplainerKind kind, const Query& q, const PartialAssignment& e) {
  require_theory(q, e);
  const Instance& x = q.instance();
  const ClassId c = q.label();
  const auto instances = enumerate_instances(q.theory());
  switch (kind) {
    case ExplainerKind::GNec:
      if (e.empty()) return false;
      for (const PartialAssignment& y : instances) {
        if (!e.subset_of(y) && classify(q, y) == c) return false;
      }
      return true;
    case ExplainerKind::SNec:
      if (!e.subset_of(x)) return false;
      for (const PartialAssignment& y : instances) {
        if (x.minus(y) == e && classify(q, y) == c) return false;
      }
      return true;
    case ExplainerKind::SSuf:
      if (!e.disjoint_with(x)) return false;
      [[fallthrough]];
    case ExplainerKind::GSuf:
      for (const PartialAssignment& y : instances) {
        if (e.subset_of(y) && classify(q, y) == c) return false;
      }
      return true;
    case ExplainerKind::CSuf:
      for (const PartialAssignment& y : instances) {
        if (classify(q, y) != c && y.minus(x) == e) return true;
      }
      return false;
    default:
      throw Error(ErrorCode::InvalidArgument,
                  std::string(to_string(kind)) + " has no definitional membership test here");
  }
}

}  // namespace cfx
