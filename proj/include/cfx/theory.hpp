#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <iterator>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace cfx {

using FeatureId = std::size_t;
using ValueId = int;
using ClassId = std::size_t;

inline constexpr ValueId kAbsent = -1;

struct Feature {
  std::string name;
  std::vector<std::string> domain;
};

struct Literal {
  FeatureId feature = 0;
  ValueId value = 0;

  friend auto operator<=>(const Literal&, const Literal&) = default;
};

/// A classification theory: ordered features with finite domains and a class set.
/// Identifiers are interned; positions in the vectors are the internal ids.
class Theory {
 public:
  /// Validates and builds. Throws DomainTooSmall, TooFewClasses or DuplicateIdentifier.
  static Theory create(std::vector<Feature> features, std::vector<std::string> classes);

  std::size_t num_features() const noexcept { return features_.size(); }
  const std::vector<Feature>& features() const noexcept { return features_; }
  const Feature& feature(FeatureId f) const { return features_.at(f); }
  std::size_t domain_size(FeatureId f) const { return features_.at(f).domain.size(); }
  const std::string& value_name(FeatureId f, ValueId v) const;

  std::size_t num_classes() const noexcept { return classes_.size(); }
  const std::vector<std::string>& classes() const noexcept { return classes_; }
  const std::string& class_name(ClassId c) const { return classes_.at(c); }

  std::optional<FeatureId> find_feature(std::string_view name) const;
  std::optional<ValueId> find_value(FeatureId f, std::string_view value) const;
  std::optional<ClassId> find_class(std::string_view name) const;

  /// Lookup variants that throw UnknownIdentifier.
  FeatureId feature_id(std::string_view name) const;
  ValueId value_id(FeatureId f, std::string_view value) const;
  ClassId class_id(std::string_view name) const;

  /// |F(T)|, saturating at UINT64_MAX.
  std::uint64_t instance_count() const noexcept;
  /// |E(T)| = prod (|d(f)| + 1), saturating at UINT64_MAX.
  std::uint64_t partial_assignment_count() const noexcept;

  bool is_boolean() const noexcept;

  friend bool operator==(const Theory& a, const Theory& b) {
    return a.classes_ == b.classes_ && a.features_.size() == b.features_.size() &&
           std::equal(a.features_.begin(), a.features_.end(), b.features_.begin(),
                      [](const Feature& x, const Feature& y) {
                        return x.name == y.name && x.domain == y.domain;
                      });
  }

 private:
  Theory() = default;

  std::vector<Feature> features_;
  std::vector<std::string> classes_;
  std::unordered_map<std::string, FeatureId> feature_index_;
  std::vector<std::unordered_map<std::string, ValueId>> value_index_;
  std::unordered_map<std::string, ClassId> class_index_;
};

using TheoryPtr = std::shared_ptr<const Theory>;

Theory validate_theory(std::vector<Feature> features, std::vector<std::string> classes);

/// A consistent set of literals: at most one value per feature. Stored densely
/// as one slot per feature, kAbsent where the feature is not covered.
class PartialAssignment {
 public:
  PartialAssignment() = default;
  explicit PartialAssignment(std::size_t num_features)
      : values_(num_features, kAbsent) {}

  /// Throws InvalidArgument on two different values for one feature.
  static PartialAssignment from_literals(const Theory& theory, std::span<const Literal> literals);
  static PartialAssignment from_values(std::vector<ValueId> values);

  std::size_t arity() const noexcept { return values_.size(); }
  std::size_t size() const noexcept { return count_; }
  bool empty() const noexcept { return count_ == 0; }
  bool is_complete() const noexcept { return count_ == values_.size(); }

  bool has(FeatureId f) const { return values_.at(f) != kAbsent; }
  ValueId value(FeatureId f) const { return values_.at(f); }
  std::span<const ValueId> values() const noexcept { return values_; }

  void set(FeatureId f, ValueId v);
  void erase(FeatureId f);

  bool contains(const Literal& l) const {
    return l.feature < values_.size() && values_[l.feature] == l.value && l.value != kAbsent;
  }

  /// Literals in feature order.
  std::vector<Literal> literals() const;
  /// Feat(E): covered features in order.
  std::vector<FeatureId> features() const;

  bool subset_of(const PartialAssignment& other) const;
  bool disjoint_with(const PartialAssignment& other) const;
  /// Literal set difference: this \ other.
  PartialAssignment minus(const PartialAssignment& other) const;
  PartialAssignment intersect(const PartialAssignment& other) const;
  /// Feat(this) is a subset of Feat(other).
  bool features_subset_of(const PartialAssignment& other) const;

  /// Checks that every literal value lies in the theory's domains and arity matches.
  bool valid_for(const Theory& theory) const noexcept;

  friend bool operator==(const PartialAssignment& a, const PartialAssignment& b) {
    return a.values_ == b.values_;
  }
  friend auto operator<=>(const PartialAssignment& a, const PartialAssignment& b) {
    return a.values_ <=> b.values_;
  }

 private:
  std::vector<ValueId> values_;
  std::size_t count_ = 0;
};

/// Canonical presentation order: by cardinality, then lexicographically over
/// the (feature, value) literal sequence.
bool canonical_less(const PartialAssignment& a, const PartialAssignment& b);

/// A partial assignment covering every feature exactly once.
class Instance : public PartialAssignment {
 public:
  Instance() = default;
  /// Throws InvalidArgument when `pa` is not complete.
  explicit Instance(PartialAssignment pa);
  static Instance from_values(std::vector<ValueId> values);
};

/// Mixed-radix rank of an instance; the first feature is the most significant
/// digit, so ranks follow enumeration order.
std::uint64_t instance_rank(const Theory& theory, const PartialAssignment& x);
Instance instance_at(const Theory& theory, std::uint64_t rank);

/// Odometer over per-feature choice lists. A choice of kAbsent leaves the
/// feature uncovered. Feature 0 varies slowest.
class AssignmentRange {
 public:
  explicit AssignmentRange(std::vector<std::vector<ValueId>> choices);

  class iterator {
   public:
    using iterator_category = std::input_iterator_tag;
    using value_type = PartialAssignment;
    using difference_type = std::ptrdiff_t;
    using pointer = const PartialAssignment*;
    using reference = const PartialAssignment&;

    iterator() = default;
    reference operator*() const { return current_; }
    pointer operator->() const { return &current_; }
    iterator& operator++();
    void operator++(int) { ++*this; }
    friend bool operator==(const iterator& it, std::default_sentinel_t) { return it.done_; }

   private:
    friend class AssignmentRange;
    const std::vector<std::vector<ValueId>>* choices_ = nullptr;
    std::vector<std::size_t> digits_;
    PartialAssignment current_;
    bool done_ = true;
  };

  iterator begin() const;
  std::default_sentinel_t end() const { return {}; }
  std::uint64_t count() const noexcept;

 private:
  std::vector<std::vector<ValueId>> choices_;
};

/// F(T) in lexicographic (feature order, domain order).
AssignmentRange enumerate_instances(const Theory& theory);
/// E(T); the empty assignment comes first.
AssignmentRange enumerate_partial_assignments(const Theory& theory);
/// E(T) restricted to assignments sharing no literal with `e`.
AssignmentRange disjoint_assignments(const Theory& theory, const PartialAssignment& e);
/// All instances y with e subset of y.
AssignmentRange extensions(const Theory& theory, const PartialAssignment& e);

/// "t=mild, a=climbing" in feature order; empty for the empty assignment.
std::string to_text(const Theory& theory, const PartialAssignment& e);
/// to_text wrapped in braces: "{t=mild}", "{}".
std::string braced(const Theory& theory, const PartialAssignment& e);

/// x overwritten by e on Feat(e). Throws TheoryMismatch on arity mismatch.
Instance substitute(const Instance& x, const PartialAssignment& e);
/// { y : x \ y = e }, in enumeration order. Empty when e is not a subset of x.
std::vector<Instance> residual(const Theory& theory, const Instance& x, const PartialAssignment& e);

}  // namespace cfx
