#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cfx/classifier.hpp"
#include "cfx/theory.hpp"

namespace cfx {

enum class ExplainerKind { GNec, SNec, GSuf, SSuf, CSuf, Lwf, Lc, Ld, LdTau };

/// "gNec", "sNec", "gSuf", "sSuf", "cSuf", "Lwf", "Lc", "Ld", "LdTau".
std::string_view to_string(ExplainerKind kind);
/// Case-insensitive; also accepts "ld-tau" / "ld_tau".
std::optional<ExplainerKind> parse_kind(std::string_view text);
bool is_core_kind(ExplainerKind kind) noexcept;

/// Duplicate-free explanations in canonical order (cardinality, then literal
/// sequence). `truncated` records that a cap cut the enumeration short.
class ExplanationSet {
 public:
  ExplanationSet() = default;
  /// Sorts and deduplicates.
  ExplanationSet(std::string kind, std::vector<PartialAssignment> items, bool truncated = false);

  const std::string& kind() const noexcept { return kind_; }
  const std::vector<PartialAssignment>& items() const noexcept { return items_; }
  std::size_t size() const noexcept { return items_.size(); }
  bool empty() const noexcept { return items_.empty(); }
  bool truncated() const noexcept { return truncated_; }
  bool contains(const PartialAssignment& e) const;
  /// Every item of this set is in `other` (the kind label is ignored).
  bool subset_of(const ExplanationSet& other) const;

  auto begin() const noexcept { return items_.begin(); }
  auto end() const noexcept { return items_.end(); }

  /// Same explanations and truncation flag; the kind label is ignored.
  friend bool operator==(const ExplanationSet& a, const ExplanationSet& b) {
    return a.truncated_ == b.truncated_ && a.items_ == b.items_;
  }

 private:
  std::string kind_;
  std::vector<PartialAssignment> items_;
  bool truncated_ = false;
};

/// nullopt means unlimited.
using Cap = std::optional<std::size_t>;

/// Visits partial assignments in canonical order. choices[f] lists the values
/// feature f may take when covered (sorted ascending); the visitor returns
/// false to stop. Sizes run from min_size to max_size inclusive.
void for_each_canonical(const std::vector<std::vector<ValueId>>& choices,
                        const std::function<bool(const PartialAssignment&)>& visit,
                        std::size_t min_size = 0,
                        std::size_t max_size = static_cast<std::size_t>(-1));

// --- The five families, by enumeration -------------------------------------

/// Nonempty subsets of Core(kappa(x)).
ExplanationSet g_nec(const Query& q, Cap cap = std::nullopt);
/// E subset of x with every y in x (-) E classified differently.
ExplanationSet s_nec(const Query& q, Cap cap = std::nullopt);
/// E with every extension classified differently.
ExplanationSet g_suf(const Query& q, Cap cap = std::nullopt);
/// The members of g_suf sharing no literal with x.
ExplanationSet s_suf(const Query& q, Cap cap = std::nullopt);
/// { y \ x : kappa(y) != kappa(x) }.
ExplanationSet c_suf(const Query& q, Cap cap = std::nullopt);

/// Dispatches over the five core kinds; InvalidArgument for the derived ones.
ExplanationSet explain_core(ExplainerKind kind, const Query& q, Cap cap = std::nullopt);

/// Membership decided by the definitional quantifier over F(T), independently
/// of the generators above. Throws TheoryMismatch when E is not over the
/// query's theory and InvalidArgument for the derived kinds.
bool is_member(ExplainerKind kind, const Query& q, const PartialAssignment& e);

/// Class of y under q's classifier via the cached label table.
ClassId label_of(const Query& q, const PartialAssignment& y);

}  // namespace cfx
