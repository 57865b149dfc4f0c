#include "cfx/sat_explain.hpp"

#include "cfx/error.hpp"

namespace cfx {

namespace {

using sat::Lit;

void require_boolean(const Query& q) {
  if (q.classifier().kind() != Classifier::Kind::Formula || !q.theory().is_boolean()) {
    throw Error(ErrorCode::NotBoolean,
                "oracle procedures need a formula classifier over boolean features");
  }
}

/// "feature f takes value v" as a variable literal; features are 1..n.
Lit lit(FeatureId f, ValueId v) {
  const Lit var = static_cast<Lit>(f + 1);
  return v == 1 ? var : -var;
}

ClassId other_class(const Classifier& k, ClassId c) {
  return c == k.true_class() ? k.false_class() : k.true_class();
}

/// CNF asserting that y has class c; further constraints are added by callers.
sat::Cnf class_cnf(const Query& q, ClassId c) {
  const std::size_t n = q.theory().num_features();
  sat::Cnf cnf;
  cnf.num_vars = static_cast<int>(n);
  const auto atoms = sat::feature_literals(n);
  cnf.add({sat::tseitin(cnf, class_indicator(q.classifier(), c), atoms)});
  return cnf;
}

std::optional<Instance> solve(sat::SatOracle& oracle, const sat::Cnf& cnf, std::size_t n) {
  const sat::SatResult r = oracle.solve(cnf);
  if (!r.satisfiable) return std::nullopt;
  std::vector<ValueId> values(n);
  for (std::size_t f = 0; f < n; ++f) values[f] = r.model[f] ? 1 : 0;
  return Instance::from_values(std::move(values));
}

bool unsat(sat::SatOracle& oracle, const sat::Cnf& cnf) { return !oracle.solve(cnf).satisfiable; }

/// Literals stating that y differs from x, one per feature.
std::vector<Lit> difference_literals(const Instance& x) {
  std::vector<Lit> out(x.arity());
  for (FeatureId f = 0; f < x.arity(); ++f) out[f] = lit(f, 1 - x.value(f));
  return out;
}

std::vector<double> separable_weights(const Query& q, const DistanceMeasure* dd) {
  if (!dd) return std::vector<double>(q.theory().num_features(), 1.0);
  if (!dd->weights()) {
    throw Error(ErrorCode::InvalidArgument,
                "distance '" + dd->name() + "' is not a per-feature sum; no SAT encoding");
  }
  return *dd->weights();
}

double distance(const Query& q, const DistanceMeasure* dd, const PartialAssignment& y) {
  if (dd) return (*dd)(y, q.instance());
  return static_cast<double>(y.minus(q.instance()).size());
}

/// Adds "y agrees with x outside Feat(e) and y does not differ from x on all
/// of Feat(e)": the witnesses of a CSR over a strictly smaller feature set.
void add_strictly_smaller_support(sat::Cnf& cnf, const Instance& x, const PartialAssignment& e) {
  std::vector<Lit> some_kept;
  for (FeatureId f = 0; f < x.arity(); ++f) {
    if (e.has(f)) {
      some_kept.push_back(lit(f, x.value(f)));
    } else {
      cnf.add({lit(f, x.value(f))});
    }
  }
  cnf.add(std::move(some_kept));
}

PartialAssignment complement(const PartialAssignment& e) {
  PartialAssignment out(e.arity());
  for (const Literal& l : e.literals()) out.set(l.feature, 1 - l.value);
  return out;
}

}  // namespace

PropFormula class_indicator(const Classifier& k, ClassId c) {
  if (c == k.true_class()) return k.formula();
  if (c == k.false_class()) return PropFormula::negate(k.formula());
  throw Error(ErrorCode::UnknownClass, "class is not one of the formula classifier's labels");
}

bool decide_exp(ExplainerKind kind, const Query& q, const PartialAssignment& e,
                sat::SatOracle& oracle, const DistanceMeasure* dd, double tau) {
  require_boolean(q);
  if (!e.valid_for(q.theory())) {
    throw Error(ErrorCode::TheoryMismatch, "explanation is not over the query's theory");
  }
  const Instance& x = q.instance();
  const ClassId c = q.label();
  const ClassId other = other_class(q.classifier(), c);

  switch (kind) {
    case ExplainerKind::CSuf: return is_csr(q, e);

    case ExplainerKind::SNec:
      // For boolean features x (-) E is the single instance x with E flipped.
      return e.subset_of(x) && q.classify(substitute(x, complement(e))) != c;

    case ExplainerKind::GNec:
      if (e.empty()) return false;
      for (const Literal& l : e.literals()) {
        sat::Cnf cnf = class_cnf(q, c);
        cnf.add({lit(l.feature, 1 - l.value)});
        if (!unsat(oracle, cnf)) return false;
      }
      return true;

    case ExplainerKind::SSuf:
      if (!e.disjoint_with(x)) return false;
      [[fallthrough]];
    case ExplainerKind::GSuf: {
      sat::Cnf cnf = class_cnf(q, c);
      for (const Literal& l : e.literals()) cnf.add({lit(l.feature, l.value)});
      return unsat(oracle, cnf);
    }

    case ExplainerKind::Lwf: {
      if (!is_csr(q, e)) return false;
      if (e.size() <= 1) return true;
      sat::Cnf cnf = class_cnf(q, other);
      add_strictly_smaller_support(cnf, x, e);
      return unsat(oracle, cnf);
    }

    case ExplainerKind::Lc: {
      if (!is_csr(q, e)) return false;
      if (e.size() <= 1) return true;
      sat::Cnf cnf = class_cnf(q, other);
      sat::at_most_k(cnf, difference_literals(x), e.size() - 1);
      return unsat(oracle, cnf);
    }

    case ExplainerKind::Ld: {
      if (!is_csr(q, e)) return false;
      const auto weights = separable_weights(q, dd);
      sat::Cnf cnf = class_cnf(q, other);
      sat::weighted_sum_below(cnf, difference_literals(x), weights,
                              distance(q, dd, substitute(x, e)));
      return unsat(oracle, cnf);
    }

    case ExplainerKind::LdTau: return is_csr(q, e) && distance(q, dd, substitute(x, e)) < tau;
  }
  return false;
}

std::optional<PartialAssignment> find_exp(ExplainerKind kind, const Query& q,
                                          sat::SatOracle& oracle, const DistanceMeasure* dd,
                                          double tau) {
  require_boolean(q);
  const Instance& x = q.instance();
  const ClassId c = q.label();
  const ClassId other = other_class(q.classifier(), c);
  const std::size_t n = q.theory().num_features();

  switch (kind) {
    case ExplainerKind::SSuf: {
      const PartialAssignment xbar = complement(x);
      if (q.classify(xbar) != c) return xbar;
      return std::nullopt;
    }

    case ExplainerKind::CSuf:
    case ExplainerKind::GSuf:
    case ExplainerKind::SNec: {
      auto y = solve(oracle, class_cnf(q, other), n);
      if (!y) return std::nullopt;
      if (kind == ExplainerKind::CSuf) return y->minus(x);
      if (kind == ExplainerKind::SNec) return x.minus(*y);
      return PartialAssignment(*y);
    }

    case ExplainerKind::GNec:
      for (FeatureId f = 0; f < n; ++f) {
        sat::Cnf cnf = class_cnf(q, c);
        cnf.add({lit(f, 1 - x.value(f))});
        if (unsat(oracle, cnf)) {
          PartialAssignment e(n);
          e.set(f, x.value(f));
          return e;
        }
      }
      return std::nullopt;

    case ExplainerKind::Lwf: {
      auto y = solve(oracle, class_cnf(q, other), n);
      if (!y) return std::nullopt;
      PartialAssignment e = y->minus(x);
      while (true) {
        // Drop features one at a time while the class stays flipped.
        for (FeatureId f : e.features()) {
          PartialAssignment smaller = e;
          smaller.erase(f);
          if (!smaller.empty() && q.classify(substitute(x, smaller)) != c) e = std::move(smaller);
        }
        if (e.size() <= 1) break;
        // Greedy removal is only locally minimal; ask for a flip on a strictly
        // smaller feature set and restart from it if one exists.
        sat::Cnf cnf = class_cnf(q, other);
        add_strictly_smaller_support(cnf, x, e);
        auto z = solve(oracle, cnf, n);
        if (!z) break;
        e = z->minus(x);
      }
      return e;
    }

    case ExplainerKind::Lc:
      for (std::size_t k = 1; k <= n; ++k) {
        sat::Cnf cnf = class_cnf(q, other);
        sat::at_most_k(cnf, difference_literals(x), k);
        if (auto y = solve(oracle, cnf, n)) return y->minus(x);
      }
      return std::nullopt;

    case ExplainerKind::Ld: {
      const auto weights = separable_weights(q, dd);
      auto y = solve(oracle, class_cnf(q, other), n);
      if (!y) return std::nullopt;
      while (true) {
        sat::Cnf cnf = class_cnf(q, other);
        sat::weighted_sum_below(cnf, difference_literals(x), weights, distance(q, dd, *y));
        auto better = solve(oracle, cnf, n);
        if (!better) break;
        y = std::move(better);
      }
      return y->minus(x);
    }

    case ExplainerKind::LdTau: {
      const auto weights = separable_weights(q, dd);
      sat::Cnf cnf = class_cnf(q, other);
      if (tau != kInfinity) sat::weighted_sum_below(cnf, difference_literals(x), weights, tau);
      auto y = solve(oracle, cnf, n);
      if (!y) return std::nullopt;
      return y->minus(x);
    }
  }
  return std::nullopt;
}

}  // namespace cfx
