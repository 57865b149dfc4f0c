#include "cfx/classifier.hpp"

#include <mutex>

#include "cfx/error.hpp"
#include "cfx/sat.hpp"

namespace cfx {

struct Classifier::State {
  TheoryPtr theory;
  Kind kind = Kind::Table;
  std::vector<ClassId> table;
  std::optional<PropFormula> phi;
  ClassId if_true = 0;
  ClassId if_false = 0;

  std::once_flag labels_once;
  std::vector<ClassId> labels;
};

namespace {

std::uint64_t rank_of(const Theory& theory, std::span<const ValueId> values) {
  std::uint64_t r = 0;
  for (FeatureId f = 0; f < theory.num_features(); ++f) {
    r = r * theory.domain_size(f) + static_cast<std::uint64_t>(values[f]);
  }
  return r;
}

/// Literal constraint "feature f takes value v" for a boolean theory.
PropFormula literal_formula(FeatureId f, ValueId v) {
  PropFormula a = PropFormula::atom(f);
  return v == 1 ? a : PropFormula::negate(a);
}

bool satisfiable(const PropFormula& phi, std::size_t n) {
  sat::SatOracle oracle = sat::SatOracle::builtin();
  return sat::sat_solve(phi, n, oracle).has_value();
}

}  // namespace

Classifier Classifier::table(TheoryPtr theory, std::vector<ClassId> labels) {
  if (!theory) throw Error(ErrorCode::InvalidArgument, "classifier needs a theory");
  if (labels.size() != theory->instance_count()) {
    throw Error(ErrorCode::IncompleteTable,
                "table has " + std::to_string(labels.size()) + " rows but the theory has " +
                    std::to_string(theory->instance_count()) + " instances");
  }
  for (ClassId c : labels) {
    if (c >= theory->num_classes()) {
      throw Error(ErrorCode::UnknownClass, "table label " + std::to_string(c) + " out of range");
    }
  }
  auto s = std::make_shared<State>();
  s->theory = std::move(theory);
  s->kind = Kind::Table;
  s->table = std::move(labels);
  return Classifier(std::move(s));
}

Classifier Classifier::tabulate(TheoryPtr theory,
                                const std::function<ClassId(const Instance&)>& fn) {
  if (!theory) throw Error(ErrorCode::InvalidArgument, "classifier needs a theory");
  if (theory->instance_count() > kMaxTabulatedInstances) {
    throw Error(ErrorCode::InvalidArgument, "feature space too large to tabulate");
  }
  std::vector<ClassId> labels;
  labels.reserve(theory->instance_count());
  for (const PartialAssignment& y : enumerate_instances(*theory)) {
    labels.push_back(fn(Instance(y)));
  }
  return table(std::move(theory), std::move(labels));
}

Classifier Classifier::formula(TheoryPtr theory, PropFormula phi, ClassId if_true,
                               ClassId if_false) {
  if (!theory) throw Error(ErrorCode::InvalidArgument, "classifier needs a theory");
  if (!theory->is_boolean()) {
    throw Error(ErrorCode::NotBoolean, "formula classifiers need two-valued domains");
  }
  if (if_true >= theory->num_classes() || if_false >= theory->num_classes()) {
    throw Error(ErrorCode::UnknownClass, "formula class label out of range");
  }
  if (if_true == if_false) {
    throw Error(ErrorCode::InvalidArgument, "formula classifier needs two distinct classes");
  }
  if (theory->num_classes() != 2) {
    throw Error(ErrorCode::InvalidArgument, "formula classifiers are binary");
  }
  if (phi.atom_bound() > theory->num_features()) {
    throw Error(ErrorCode::TheoryMismatch, "formula mentions a feature outside the theory");
  }
  auto s = std::make_shared<State>();
  s->theory = std::move(theory);
  s->kind = Kind::Formula;
  s->phi = std::move(phi);
  s->if_true = if_true;
  s->if_false = if_false;
  return Classifier(std::move(s));
}

Classifier::Kind Classifier::kind() const noexcept { return state_->kind; }
const Theory& Classifier::theory() const noexcept { return *state_->theory; }
const TheoryPtr& Classifier::theory_ptr() const noexcept { return state_->theory; }

ClassId Classifier::classify(const PartialAssignment& x) const {
  if (!x.valid_for(theory()) || !x.is_complete()) {
    throw Error(ErrorCode::TheoryMismatch, "not an instance of the classifier's theory");
  }
  return classify_values(x.values());
}

ClassId Classifier::classify_values(std::span<const ValueId> values) const {
  if (state_->kind == Kind::Table) return state_->table[rank_of(theory(), values)];
  return state_->phi->evaluate(values) ? state_->if_true : state_->if_false;
}

const PropFormula& Classifier::formula() const {
  if (state_->kind != Kind::Formula) {
    throw Error(ErrorCode::InvalidArgument, "not a formula classifier");
  }
  return *state_->phi;
}

ClassId Classifier::true_class() const {
  formula();
  return state_->if_true;
}

ClassId Classifier::false_class() const {
  formula();
  return state_->if_false;
}

const std::vector<ClassId>& Classifier::labels() const {
  if (state_->kind == Kind::Table) return state_->table;
  std::call_once(state_->labels_once, [this] {
    if (theory().instance_count() > kMaxTabulatedInstances) {
      throw Error(ErrorCode::InvalidArgument, "feature space too large to tabulate");
    }
    std::vector<ClassId> out;
    out.reserve(theory().instance_count());
    for (const PartialAssignment& y : enumerate_instances(theory())) {
      out.push_back(classify_values(y.values()));
    }
    state_->labels = std::move(out);
  });
  return state_->labels;
}

bool Classifier::same_function(const Classifier& other) const {
  if (state_ == other.state_) return true;
  if (!(theory() == other.theory())) return false;
  if (kind() == Kind::Formula && other.kind() == Kind::Formula && formula() == other.formula() &&
      true_class() == other.true_class()) {
    return true;
  }
  return labels() == other.labels();
}

SurjectivityVerdict check_surjective(const Classifier& k) {
  SurjectivityVerdict v;
  const Theory& t = k.theory();
  if (k.kind() == Classifier::Kind::Formula) {
    if (!satisfiable(k.formula(), t.num_features())) v.missing.push_back(k.true_class());
    if (!satisfiable(PropFormula::negate(k.formula()), t.num_features())) {
      v.missing.push_back(k.false_class());
    }
    std::sort(v.missing.begin(), v.missing.end());
  } else {
    std::vector<char> seen(t.num_classes(), 0);
    for (ClassId c : k.labels()) seen[c] = 1;
    for (ClassId c = 0; c < t.num_classes(); ++c) {
      if (!seen[c]) v.missing.push_back(c);
    }
  }
  v.ok = v.missing.empty();
  return v;
}

PartialAssignment core_literals_enumerated(const Classifier& k, ClassId c) {
  const Theory& t = k.theory();
  const auto& labels = k.labels();
  std::optional<PartialAssignment> acc;
  std::uint64_t r = 0;
  for (const PartialAssignment& y : enumerate_instances(t)) {
    if (labels[r++] != c) continue;
    acc = acc ? acc->intersect(y) : y;
    if (acc->empty()) break;
  }
  if (!acc) {
    throw Error(ErrorCode::NotSurjective, "class '" + t.class_name(c) + "' has no instance");
  }
  return *acc;
}

PartialAssignment core_literals(const Classifier& k, ClassId c) {
  if (k.kind() == Classifier::Kind::Table) return core_literals_enumerated(k, c);
  const Theory& t = k.theory();
  if (c != k.true_class() && c != k.false_class()) {
    throw Error(ErrorCode::UnknownClass, "class is not produced by this classifier");
  }
  const PropFormula indicator =
      c == k.true_class() ? k.formula() : PropFormula::negate(k.formula());
  const std::size_t n = t.num_features();
  if (!satisfiable(indicator, n)) {
    throw Error(ErrorCode::NotSurjective, "class '" + t.class_name(c) + "' has no instance");
  }
  PartialAssignment core(n);
  for (FeatureId f = 0; f < n; ++f) {
    for (ValueId v = 0; v < 2; ++v) {
      // (f, v) is core iff no instance of class c has the other value.
      if (!satisfiable(PropFormula::conj(indicator, literal_formula(f, 1 - v)), n)) {
        core.set(f, v);
      }
    }
  }
  return core;
}

Query Query::create(Classifier k, Instance x) {
  if (!x.valid_for(k.theory()) || !x.is_complete()) {
    throw Error(ErrorCode::TheoryMismatch, "instance does not belong to the query's theory");
  }
  const SurjectivityVerdict v = check_surjective(k);
  if (!v.ok) {
    std::string names;
    for (ClassId c : v.missing) {
      if (!names.empty()) names += ", ";
      names += k.theory().class_name(c);
    }
    throw Error(ErrorCode::NotSurjective, "classifier never predicts: " + names);
  }
  const ClassId label = k.classify(x);
  return Query(std::move(k), std::move(x), label);
}

}  // namespace cfx
