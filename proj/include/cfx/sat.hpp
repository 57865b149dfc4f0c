#pragma once

#include <cstddef>
#include <initializer_list>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cfx/formula.hpp"
#include "cfx/theory.hpp"

namespace cfx::sat {

/// DIMACS literal: +v or -v with v >= 1.
using Lit = int;

struct Cnf {
  int num_vars = 0;
  std::vector<std::vector<Lit>> clauses;

  int new_var() { return ++num_vars; }
  void add(std::initializer_list<Lit> clause) { clauses.emplace_back(clause); }
  void add(std::vector<Lit> clause) { clauses.push_back(std::move(clause)); }
};

struct SatResult {
  bool satisfiable = false;
  /// model[v - 1] is the value of variable v. Empty when unsatisfiable.
  std::vector<bool> model;

  bool value(Lit l) const { return l > 0 ? model.at(l - 1) : !model.at(-l - 1); }
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual SatResult solve(const Cnf& cnf) = 0;
  virtual std::string name() const = 0;
};

/// Plain DPLL with two-watched-literal unit propagation and chronological
/// backtracking. Branches on variables in index order, true first, and stops
/// as soon as every clause is satisfied; variables left unassigned are false.
class DpllBackend final : public Backend {
 public:
  SatResult solve(const Cnf& cnf) override;
  std::string name() const override { return "builtin"; }
};

/// Runs `<executable> <file.cnf>` and reads SAT-competition output
/// ("s SATISFIABLE" / "s UNSATISFIABLE" plus "v ..." lines). Throws
/// BackendFailure on a crash, garbled output, or a model that does not
/// satisfy the formula.
class ExecBackend final : public Backend {
 public:
  explicit ExecBackend(std::string executable) : executable_(std::move(executable)) {}
  SatResult solve(const Cnf& cnf) override;
  std::string name() const override { return "exec:" + executable_; }

 private:
  std::string executable_;
};

/// Counting front end over a backend; every solve() is one oracle call.
class SatOracle {
 public:
  explicit SatOracle(std::shared_ptr<Backend> backend) : backend_(std::move(backend)) {}

  static SatOracle builtin() { return SatOracle(std::make_shared<DpllBackend>()); }
  /// "builtin" or "exec:<path>". Throws InvalidArgument otherwise.
  static SatOracle from_spec(std::string_view spec);

  SatResult solve(const Cnf& cnf) {
    ++calls_;
    return backend_->solve(cnf);
  }

  std::size_t calls() const noexcept { return calls_; }
  void reset_calls() noexcept { calls_ = 0; }
  std::string backend_name() const { return backend_->name(); }

 private:
  std::shared_ptr<Backend> backend_;
  std::size_t calls_ = 0;
};

/// Checks every clause against a total model.
bool satisfies(const Cnf& cnf, const std::vector<bool>& model);

// --- Encodings --------------------------------------------------------------

/// Tseitin translation with full gate equivalences. Atom f maps to atom_lits[f].
/// Returns the literal equivalent to the formula; nothing is asserted.
Lit tseitin(Cnf& cnf, const PropFormula& formula, std::span<const Lit> atom_lits);

/// At most k of `lits` are true (sequential counter).
void at_most_k(Cnf& cnf, std::span<const Lit> lits, std::size_t k);

/// sum_i weights[i] * [lits[i]] < bound, for non-negative weights. Encoded as a
/// decision diagram over the literals in order; the partial sums are
/// accumulated left to right so that ties agree with a feature-order sum.
void weighted_sum_below(Cnf& cnf, std::span<const Lit> lits, std::span<const double> weights,
                        double bound);

// --- DIMACS -----------------------------------------------------------------

std::string to_dimacs(const Cnf& cnf);
/// Throws ParseError with line/column on malformed input.
Cnf parse_dimacs(std::string_view text);
/// SAT-competition style result block.
std::string format_result(const SatResult& result);

// --- Formula-level convenience ---------------------------------------------

/// Features of an n-feature boolean theory occupy variables 1..n.
std::vector<Lit> feature_literals(std::size_t num_features);

/// CNF asserting `formula`, with features on variables 1..num_features.
Cnf encode_formula(const PropFormula& formula, std::size_t num_features);

/// A satisfying full instance, or nullopt when unsatisfiable. With the
/// builtin backend the answer is deterministic.
std::optional<Instance> sat_solve(const PropFormula& formula, std::size_t num_features,
                                  SatOracle& oracle);

}  // namespace cfx::sat
