#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "cfx/formula.hpp"
#include "cfx/theory.hpp"

namespace cfx {

/// A total map F(T) -> C, either an explicit table indexed by instance rank or a
/// boolean formula with one class for "true" and one for "false".
///
/// Copies share state, so two copies of one classifier compare as the same
/// function in O(1); the label table used by the enumeration routines is
/// computed once per shared state.
class Classifier {
 public:
  enum class Kind { Table, Formula };

  /// labels[r] is the class of instance_at(theory, r). Throws IncompleteTable when
  /// the table does not cover F(T) exactly, UnknownClass for an out-of-range label.
  static Classifier table(TheoryPtr theory, std::vector<ClassId> labels);
  /// Tabulates `fn` over F(T).
  static Classifier tabulate(TheoryPtr theory,
                             const std::function<ClassId(const Instance&)>& fn);
  /// Throws NotBoolean unless every domain has exactly two values, InvalidArgument
  /// when both labels coincide, TheoryMismatch for atoms outside the theory.
  static Classifier formula(TheoryPtr theory, PropFormula phi, ClassId if_true, ClassId if_false);

  Kind kind() const noexcept;
  const Theory& theory() const noexcept;
  const TheoryPtr& theory_ptr() const noexcept;

  /// Throws TheoryMismatch unless x is a complete, valid instance of the theory.
  ClassId classify(const PartialAssignment& x) const;
  /// Unchecked variant over a dense value vector.
  ClassId classify_values(std::span<const ValueId> values) const;

  /// Formula accessors; throw InvalidArgument on a table classifier.
  const PropFormula& formula() const;
  ClassId true_class() const;
  ClassId false_class() const;

  /// Class of every instance, indexed by rank. Computed once and cached.
  /// Throws InvalidArgument when F(T) is too large to tabulate.
  const std::vector<ClassId>& labels() const;

  /// True when both classifiers share state, or agree on every instance of
  /// the same theory.
  bool same_function(const Classifier& other) const;
  bool shares_state(const Classifier& other) const noexcept { return state_ == other.state_; }

 private:
  struct State;
  explicit Classifier(std::shared_ptr<State> state) : state_(std::move(state)) {}

  std::shared_ptr<State> state_;
};

/// Largest |F(T)| the enumeration routines will tabulate.
inline constexpr std::uint64_t kMaxTabulatedInstances = std::uint64_t{1} << 24;

struct SurjectivityVerdict {
  bool ok = true;
  std::vector<ClassId> missing;
};

/// Tables are scanned; formula classifiers take two satisfiability checks.
SurjectivityVerdict check_surjective(const Classifier& k);

/// Core(c): literals common to every instance of class c, as a partial
/// assignment. Tables intersect their preimage; formula classifiers decide
/// each literal with one satisfiability check. Throws NotSurjective when c
/// has no instance.
PartialAssignment core_literals(const Classifier& k, ClassId c);
/// Always by intersecting the enumerated preimage.
PartialAssignment core_literals_enumerated(const Classifier& k, ClassId c);

/// Q = <T, kappa, x>.
class Query {
 public:
  /// Throws TheoryMismatch when x is not an instance of the classifier's theory
  /// and NotSurjective when some class has no instance.
  static Query create(Classifier k, Instance x);

  const Theory& theory() const noexcept { return classifier_.theory(); }
  const Classifier& classifier() const noexcept { return classifier_; }
  const Instance& instance() const noexcept { return x_; }
  /// kappa(x).
  ClassId label() const noexcept { return label_; }

  ClassId classify(const PartialAssignment& y) const { return classifier_.classify(y); }

 private:
  Query(Classifier k, Instance x, ClassId label)
      : classifier_(std::move(k)), x_(std::move(x)), label_(label) {}

  Classifier classifier_;
  Instance x_;
  ClassId label_;
};

}  // namespace cfx
