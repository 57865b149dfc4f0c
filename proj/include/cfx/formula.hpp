#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cfx/theory.hpp"

namespace cfx {

/// Propositional formula over the boolean features of a theory. Stored as a
/// postfix program, which keeps evaluation allocation-free and makes the
/// Tseitin translation a single pass.
class PropFormula {
 public:
  enum class Op { Atom, Not, And, Or, Implies, Iff };

  struct Node {
    Op op;
    FeatureId atom = 0;  // only meaningful for Op::Atom
  };

  static PropFormula atom(FeatureId f);
  static PropFormula negate(const PropFormula& a);
  static PropFormula conj(const PropFormula& a, const PropFormula& b);
  static PropFormula disj(const PropFormula& a, const PropFormula& b);
  static PropFormula implies(const PropFormula& a, const PropFormula& b);
  static PropFormula iff(const PropFormula& a, const PropFormula& b);

  std::span<const Node> program() const noexcept { return program_; }
  std::size_t node_count() const noexcept { return program_.size(); }
  /// Largest atom index + 1 (0 for a formula without atoms, which cannot occur).
  std::size_t atom_bound() const noexcept;

  /// Atoms are true when the feature takes its second domain value (index 1).
  bool evaluate(std::span<const ValueId> values) const;

  /// Fully parenthesised rendering using feature names; reparses to the same formula.
  std::string to_string(const Theory& theory) const;

  friend bool operator==(const PropFormula& a, const PropFormula& b) {
    return a.program_.size() == b.program_.size() &&
           std::equal(a.program_.begin(), a.program_.end(), b.program_.begin(),
                      [](const Node& x, const Node& y) {
                        return x.op == y.op && (x.op != Op::Atom || x.atom == y.atom);
                      });
  }

 private:
  static PropFormula binary(Op op, const PropFormula& a, const PropFormula& b);

  std::vector<Node> program_;
};

/// Grammar, loosest binding first:
///   iff     := implies ( "<->" implies )*
///   implies := or ( "->" implies )?            (right associative)
///   or      := and ( "|" and )*
///   and     := unary ( "&" unary )*
///   unary   := "!" unary | atom | "(" iff ")"
/// Atoms are feature names of `theory`. Throws ParseError with line/column.
PropFormula parse_formula(std::string_view text, const Theory& theory);

}  // namespace cfx
