#include "cfx/formula.hpp"

#include <cctype>

#include "cfx/error.hpp"

namespace cfx {

PropFormula PropFormula::atom(FeatureId f) {
  PropFormula p;
  p.program_.push_back({Op::Atom, f});
  return p;
}

PropFormula PropFormula::negate(const PropFormula& a) {
  PropFormula p = a;
  p.program_.push_back({Op::Not});
  return p;
}

PropFormula PropFormula::binary(Op op, const PropFormula& a, const PropFormula& b) {
  PropFormula p = a;
  p.program_.insert(p.program_.end(), b.program_.begin(), b.program_.end());
  p.program_.push_back({op});
  return p;
}

PropFormula PropFormula::conj(const PropFormula& a, const PropFormula& b) {
  return binary(Op::And, a, b);
}
PropFormula PropFormula::disj(const PropFormula& a, const PropFormula& b) {
  return binary(Op::Or, a, b);
}
PropFormula PropFormula::implies(const PropFormula& a, const PropFormula& b) {
  return binary(Op::Implies, a, b);
}
PropFormula PropFormula::iff(const PropFormula& a, const PropFormula& b) {
  return binary(Op::Iff, a, b);
}

std::size_t PropFormula::atom_bound() const noexcept {
  std::size_t bound = 0;
  for (const Node& n : program_) {
    if (n.op == Op::Atom) bound = std::max(bound, n.atom + 1);
  }
  return bound;
}

bool PropFormula::evaluate(std::span<const ValueId> values) const {
  std::vector<char> stack;
  stack.reserve(program_.size());
  for (const Node& n : program_) {
    if (n.op == Op::Atom) {
      stack.push_back(values[n.atom] == 1);
      continue;
    }
    if (n.op == Op::Not) {
      stack.back() = !stack.back();
      continue;
    }
    const bool b = stack.back();
    stack.pop_back();
    const bool a = stack.back();
    switch (n.op) {
      case Op::And: stack.back() = a && b; break;
      case Op::Or: stack.back() = a || b; break;
      case Op::Implies: stack.back() = !a || b; break;
      case Op::Iff: stack.back() = a == b; break;
      default: break;
    }
  }
  return stack.back() != 0;
}

std::string PropFormula::to_string(const Theory& theory) const {
  std::vector<std::string> stack;
  for (const Node& n : program_) {
    switch (n.op) {
      case Op::Atom: stack.push_back(theory.feature(n.atom).name); break;
      case Op::Not: stack.back() = "!" + stack.back(); break;
      default: {
        std::string b = std::move(stack.back());
        stack.pop_back();
        std::string a = std::move(stack.back());
        stack.pop_back();
        const char* sym = n.op == Op::And       ? " & "
                          : n.op == Op::Or      ? " | "
                          : n.op == Op::Implies ? " -> "
                                                : " <-> ";
        stack.push_back("(" + a + sym + b + ")");
      }
    }
  }
  return stack.empty() ? std::string() : stack.back();
}

namespace {

class Parser {
 public:
  Parser(std::string_view text, const Theory& theory) : text_(text), theory_(theory) {}

  PropFormula parse() {
    PropFormula f = parse_iff();
    skip_space();
    if (pos_ < text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return f;
  }

 private:
  PropFormula parse_iff() {
    PropFormula lhs = parse_implies();
    while (accept("<->")) lhs = PropFormula::iff(lhs, parse_implies());
    return lhs;
  }

  PropFormula parse_implies() {
    PropFormula lhs = parse_or();
    if (accept("->")) return PropFormula::implies(lhs, parse_implies());
    return lhs;
  }

  PropFormula parse_or() {
    PropFormula lhs = parse_and();
    while (accept("|")) lhs = PropFormula::disj(lhs, parse_and());
    return lhs;
  }

  PropFormula parse_and() {
    PropFormula lhs = parse_unary();
    while (accept("&")) lhs = PropFormula::conj(lhs, parse_unary());
    return lhs;
  }

  PropFormula parse_unary() {
    if (accept("!")) return PropFormula::negate(parse_unary());
    if (accept("(")) {
      PropFormula inner = parse_iff();
      if (!accept(")")) fail("expected ')'");
      return inner;
    }
    skip_space();
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_' ||
            text_[pos_] == '.')) {
      ++pos_;
    }
    if (start == pos_) {
      fail(pos_ < text_.size() ? "unexpected '" + std::string(1, text_[pos_]) + "'"
                               : std::string("unexpected end of formula"));
    }
    const std::string_view name = text_.substr(start, pos_ - start);
    auto f = theory_.find_feature(name);
    if (!f) {
      pos_ = start;
      fail("unknown feature '" + std::string(name) + "'");
    }
    return PropFormula::atom(*f);
  }

  bool accept(std::string_view token) {
    skip_space();
    if (text_.substr(pos_, token.size()) == token) {
      pos_ += token.size();
      return true;
    }
    return false;
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  [[noreturn]] void fail(const std::string& message) const {
    std::size_t line = 1;
    std::size_t column = 1;
    for (std::size_t i = 0; i < pos_ && i < text_.size(); ++i) {
      if (text_[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ParseError(message, line, column);
  }

  std::string_view text_;
  const Theory& theory_;
  std::size_t pos_ = 0;
};

}  // namespace

PropFormula parse_formula(std::string_view text, const Theory& theory) {
  return Parser(text, theory).parse();
}

}  // namespace cfx
