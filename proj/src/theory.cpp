#include "cfx/theory.hpp"

#include <limits>
#include <unordered_set>

#include "cfx/error.hpp"

namespace cfx {

namespace {

std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) {
    return std::numeric_limits<std::uint64_t>::max();
  }
  return a * b;
}

}  // namespace

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DomainTooSmall: return "DomainTooSmall";
    case ErrorCode::TooFewClasses: return "TooFewClasses";
    case ErrorCode::DuplicateIdentifier: return "DuplicateIdentifier";
    case ErrorCode::UnknownIdentifier: return "UnknownIdentifier";
    case ErrorCode::TheoryMismatch: return "TheoryMismatch";
    case ErrorCode::NotSurjective: return "NotSurjective";
    case ErrorCode::IncompleteTable: return "IncompleteTable";
    case ErrorCode::NotBoolean: return "NotBoolean";
    case ErrorCode::UnknownClass: return "UnknownClass";
    case ErrorCode::NotAPreorder: return "NotAPreorder";
    case ErrorCode::BackendFailure: return "BackendFailure";
    case ErrorCode::ExternalExplainerFailure: return "ExternalExplainerFailure";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Parse: return "ParseError";
  }
  return "Unknown";
}

ParseError::ParseError(const std::string& what, std::size_t line, std::size_t column)
    : Error(ErrorCode::Parse,
            line == 0 ? what
                      : what + " (line " + std::to_string(line) + ", column " +
                            std::to_string(column) + ")"),
      line_(line),
      column_(column) {}

Theory Theory::create(std::vector<Feature> features, std::vector<std::string> classes) {
  Theory t;
  t.value_index_.resize(features.size());
  for (FeatureId f = 0; f < features.size(); ++f) {
    const Feature& feat = features[f];
    if (feat.domain.size() < 2) {
      throw Error(ErrorCode::DomainTooSmall,
                  "feature '" + feat.name + "' needs at least two domain values");
    }
    if (!t.feature_index_.emplace(feat.name, f).second) {
      throw Error(ErrorCode::DuplicateIdentifier, "duplicate feature '" + feat.name + "'");
    }
    for (std::size_t v = 0; v < feat.domain.size(); ++v) {
      if (!t.value_index_[f].emplace(feat.domain[v], static_cast<ValueId>(v)).second) {
        throw Error(ErrorCode::DuplicateIdentifier,
                    "duplicate value '" + feat.domain[v] + "' for feature '" + feat.name + "'");
      }
    }
  }
  if (classes.size() < 2) {
    throw Error(ErrorCode::TooFewClasses, "a theory needs at least two classes");
  }
  for (ClassId c = 0; c < classes.size(); ++c) {
    if (!t.class_index_.emplace(classes[c], c).second) {
      throw Error(ErrorCode::DuplicateIdentifier, "duplicate class '" + classes[c] + "'");
    }
  }
  t.features_ = std::move(features);
  t.classes_ = std::move(classes);
  return t;
}

Theory validate_theory(std::vector<Feature> features, std::vector<std::string> classes) {
  return Theory::create(std::move(features), std::move(classes));
}

const std::string& Theory::value_name(FeatureId f, ValueId v) const {
  return features_.at(f).domain.at(static_cast<std::size_t>(v));
}

std::optional<FeatureId> Theory::find_feature(std::string_view name) const {
  auto it = feature_index_.find(std::string(name));
  if (it == feature_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<ValueId> Theory::find_value(FeatureId f, std::string_view value) const {
  const auto& index = value_index_.at(f);
  auto it = index.find(std::string(value));
  if (it == index.end()) return std::nullopt;
  return it->second;
}

std::optional<ClassId> Theory::find_class(std::string_view name) const {
  auto it = class_index_.find(std::string(name));
  if (it == class_index_.end()) return std::nullopt;
  return it->second;
}

FeatureId Theory::feature_id(std::string_view name) const {
  if (auto f = find_feature(name)) return *f;
  throw Error(ErrorCode::UnknownIdentifier, "unknown feature '" + std::string(name) + "'");
}

ValueId Theory::value_id(FeatureId f, std::string_view value) const {
  if (auto v = find_value(f, value)) return *v;
  throw Error(ErrorCode::UnknownIdentifier, "unknown value '" + std::string(value) +
                                                "' for feature '" + features_.at(f).name + "'");
}

ClassId Theory::class_id(std::string_view name) const {
  if (auto c = find_class(name)) return *c;
  throw Error(ErrorCode::UnknownClass, "unknown class '" + std::string(name) + "'");
}

std::uint64_t Theory::instance_count() const noexcept {
  std::uint64_t n = 1;
  for (const auto& f : features_) n = saturating_mul(n, f.domain.size());
  return n;
}

std::uint64_t Theory::partial_assignment_count() const noexcept {
  std::uint64_t n = 1;
  for (const auto& f : features_) n = saturating_mul(n, f.domain.size() + 1);
  return n;
}

bool Theory::is_boolean() const noexcept {
  return std::all_of(features_.begin(), features_.end(),
                     [](const Feature& f) { return f.domain.size() == 2; });
}

// --- PartialAssignment ------------------------------------------------------

PartialAssignment PartialAssignment::from_literals(const Theory& theory,
                                                   std::span<const Literal> literals) {
  PartialAssignment pa(theory.num_features());
  for (const Literal& l : literals) {
    if (l.feature >= theory.num_features() || l.value < 0 ||
        static_cast<std::size_t>(l.value) >= theory.domain_size(l.feature)) {
      throw Error(ErrorCode::InvalidArgument, "literal outside the theory");
    }
    if (pa.has(l.feature) && pa.value(l.feature) != l.value) {
      throw Error(ErrorCode::InvalidArgument, "inconsistent literals for feature '" +
                                                  theory.feature(l.feature).name + "'");
    }
    pa.set(l.feature, l.value);
  }
  return pa;
}

PartialAssignment PartialAssignment::from_values(std::vector<ValueId> values) {
  PartialAssignment pa;
  pa.count_ = static_cast<std::size_t>(
      std::count_if(values.begin(), values.end(), [](ValueId v) { return v != kAbsent; }));
  pa.values_ = std::move(values);
  return pa;
}

void PartialAssignment::set(FeatureId f, ValueId v) {
  ValueId& slot = values_.at(f);
  if (slot == kAbsent && v != kAbsent) ++count_;
  if (slot != kAbsent && v == kAbsent) --count_;
  slot = v;
}

void PartialAssignment::erase(FeatureId f) { set(f, kAbsent); }

std::vector<Literal> PartialAssignment::literals() const {
  std::vector<Literal> out;
  out.reserve(count_);
  for (FeatureId f = 0; f < values_.size(); ++f) {
    if (values_[f] != kAbsent) out.push_back({f, values_[f]});
  }
  return out;
}

std::vector<FeatureId> PartialAssignment::features() const {
  std::vector<FeatureId> out;
  out.reserve(count_);
  for (FeatureId f = 0; f < values_.size(); ++f) {
    if (values_[f] != kAbsent) out.push_back(f);
  }
  return out;
}

bool PartialAssignment::subset_of(const PartialAssignment& other) const {
  if (other.arity() != arity()) return false;
  for (FeatureId f = 0; f < values_.size(); ++f) {
    if (values_[f] != kAbsent && values_[f] != other.values_[f]) return false;
  }
  return true;
}

bool PartialAssignment::disjoint_with(const PartialAssignment& other) const {
  const std::size_t n = std::min(arity(), other.arity());
  for (FeatureId f = 0; f < n; ++f) {
    if (values_[f] != kAbsent && values_[f] == other.values_[f]) return false;
  }
  return true;
}

PartialAssignment PartialAssignment::minus(const PartialAssignment& other) const {
  PartialAssignment out(arity());
  for (FeatureId f = 0; f < values_.size(); ++f) {
    const bool shared = f < other.arity() && other.values_[f] == values_[f];
    if (values_[f] != kAbsent && !shared) out.set(f, values_[f]);
  }
  return out;
}

PartialAssignment PartialAssignment::intersect(const PartialAssignment& other) const {
  PartialAssignment out(arity());
  for (FeatureId f = 0; f < values_.size() && f < other.arity(); ++f) {
    if (values_[f] != kAbsent && values_[f] == other.values_[f]) out.set(f, values_[f]);
  }
  return out;
}

bool PartialAssignment::features_subset_of(const PartialAssignment& other) const {
  for (FeatureId f = 0; f < values_.size(); ++f) {
    if (values_[f] != kAbsent && (f >= other.arity() || other.values_[f] == kAbsent)) {
      return false;
    }
  }
  return true;
}

bool PartialAssignment::valid_for(const Theory& theory) const noexcept {
  if (arity() != theory.num_features()) return false;
  for (FeatureId f = 0; f < values_.size(); ++f) {
    const ValueId v = values_[f];
    if (v == kAbsent) continue;
    if (v < 0 || static_cast<std::size_t>(v) >= theory.features()[f].domain.size()) return false;
  }
  return true;
}

bool canonical_less(const PartialAssignment& a, const PartialAssignment& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  // Walk both literal sequences in feature order without materializing them.
  const auto va = a.values();
  const auto vb = b.values();
  std::size_t i = 0;
  std::size_t j = 0;
  while (true) {
    while (i < va.size() && va[i] == kAbsent) ++i;
    while (j < vb.size() && vb[j] == kAbsent) ++j;
    if (i >= va.size() || j >= vb.size()) return i >= va.size() && j < vb.size();
    if (i != j) return i < j;
    if (va[i] != vb[j]) return va[i] < vb[j];
    ++i;
    ++j;
  }
}

Instance::Instance(PartialAssignment pa) : PartialAssignment(std::move(pa)) {
  if (!is_complete()) {
    throw Error(ErrorCode::InvalidArgument, "an instance must assign every feature");
  }
}

Instance Instance::from_values(std::vector<ValueId> values) {
  return Instance(PartialAssignment::from_values(std::move(values)));
}

std::uint64_t instance_rank(const Theory& theory, const PartialAssignment& x) {
  std::uint64_t rank = 0;
  for (FeatureId f = 0; f < theory.num_features(); ++f) {
    rank = rank * theory.domain_size(f) + static_cast<std::uint64_t>(x.value(f));
  }
  return rank;
}

Instance instance_at(const Theory& theory, std::uint64_t rank) {
  std::vector<ValueId> values(theory.num_features());
  for (FeatureId f = theory.num_features(); f-- > 0;) {
    const auto d = theory.domain_size(f);
    values[f] = static_cast<ValueId>(rank % d);
    rank /= d;
  }
  return Instance::from_values(std::move(values));
}

// --- Enumeration ------------------------------------------------------------

AssignmentRange::AssignmentRange(std::vector<std::vector<ValueId>> choices)
    : choices_(std::move(choices)) {}

AssignmentRange::iterator AssignmentRange::begin() const {
  iterator it;
  it.choices_ = &choices_;
  for (const auto& c : choices_) {
    if (c.empty()) return it;
  }
  it.digits_.assign(choices_.size(), 0);
  std::vector<ValueId> values(choices_.size());
  for (std::size_t f = 0; f < choices_.size(); ++f) values[f] = choices_[f][0];
  it.current_ = PartialAssignment::from_values(std::move(values));
  it.done_ = false;
  return it;
}

AssignmentRange::iterator& AssignmentRange::iterator::operator++() {
  const auto& choices = *choices_;
  for (std::size_t f = choices.size(); f-- > 0;) {
    if (++digits_[f] < choices[f].size()) {
      current_.set(f, choices[f][digits_[f]]);
      return *this;
    }
    digits_[f] = 0;
    current_.set(f, choices[f][0]);
  }
  done_ = true;
  return *this;
}

std::uint64_t AssignmentRange::count() const noexcept {
  std::uint64_t n = 1;
  for (const auto& c : choices_) n = saturating_mul(n, c.size());
  return n;
}

namespace {

std::vector<ValueId> all_values(const Theory& theory, FeatureId f) {
  std::vector<ValueId> out(theory.domain_size(f));
  for (std::size_t v = 0; v < out.size(); ++v) out[v] = static_cast<ValueId>(v);
  return out;
}

void require_arity(const Theory& theory, const PartialAssignment& pa) {
  if (!pa.valid_for(theory)) {
    throw Error(ErrorCode::TheoryMismatch, "assignment does not belong to this theory");
  }
}

}  // namespace

AssignmentRange enumerate_instances(const Theory& theory) {
  std::vector<std::vector<ValueId>> choices;
  for (FeatureId f = 0; f < theory.num_features(); ++f) choices.push_back(all_values(theory, f));
  return AssignmentRange(std::move(choices));
}

AssignmentRange enumerate_partial_assignments(const Theory& theory) {
  std::vector<std::vector<ValueId>> choices;
  for (FeatureId f = 0; f < theory.num_features(); ++f) {
    auto c = all_values(theory, f);
    c.insert(c.begin(), kAbsent);
    choices.push_back(std::move(c));
  }
  return AssignmentRange(std::move(choices));
}

AssignmentRange disjoint_assignments(const Theory& theory, const PartialAssignment& e) {
  require_arity(theory, e);
  std::vector<std::vector<ValueId>> choices;
  for (FeatureId f = 0; f < theory.num_features(); ++f) {
    std::vector<ValueId> c{kAbsent};
    for (ValueId v : all_values(theory, f)) {
      if (e.value(f) != v) c.push_back(v);
    }
    choices.push_back(std::move(c));
  }
  return AssignmentRange(std::move(choices));
}

AssignmentRange extensions(const Theory& theory, const PartialAssignment& e) {
  require_arity(theory, e);
  std::vector<std::vector<ValueId>> choices;
  for (FeatureId f = 0; f < theory.num_features(); ++f) {
    if (e.has(f)) {
      choices.push_back({e.value(f)});
    } else {
      choices.push_back(all_values(theory, f));
    }
  }
  return AssignmentRange(std::move(choices));
}

Instance substitute(const Instance& x, const PartialAssignment& e) {
  if (x.arity() != e.arity()) {
    throw Error(ErrorCode::TheoryMismatch, "instance and assignment have different arity");
  }
  std::vector<ValueId> values(x.values().begin(), x.values().end());
  for (FeatureId f = 0; f < values.size(); ++f) {
    if (e.has(f)) values[f] = e.value(f);
  }
  return Instance::from_values(std::move(values));
}

std::vector<Instance> residual(const Theory& theory, const Instance& x,
                               const PartialAssignment& e) {
  require_arity(theory, x);
  require_arity(theory, e);
  std::vector<Instance> out;
  if (!e.subset_of(x)) return out;
  std::vector<std::vector<ValueId>> choices;
  for (FeatureId f = 0; f < theory.num_features(); ++f) {
    if (e.has(f)) {
      std::vector<ValueId> c;
      for (ValueId v : all_values(theory, f)) {
        if (v != x.value(f)) c.push_back(v);
      }
      choices.push_back(std::move(c));
    } else {
      choices.push_back({x.value(f)});
    }
  }
  for (const auto& y : AssignmentRange(std::move(choices))) out.emplace_back(y);
  return out;
}

std::string to_text(const Theory& theory, const PartialAssignment& e) {
  std::string out;
  for (const Literal& l : e.literals()) {
    if (!out.empty()) out += ", ";
    out += theory.feature(l.feature).name + "=" + theory.value_name(l.feature, l.value);
  }
  return out;
}

std::string braced(const Theory& theory, const PartialAssignment& e) {
  return "{" + to_text(theory, e) + "}";
}

}  // namespace cfx
