#include "cfx/builtin.hpp"

#include "cfx/error.hpp"

namespace cfx::builtin {

namespace {

TheoryPtr make_theory(std::vector<Feature> features, std::vector<std::string> classes) {
  return std::make_shared<const Theory>(Theory::create(std::move(features), std::move(classes)));
}

TheoryPtr binary_pair(std::vector<std::string> classes) {
  return make_theory({{"f1", {"0", "1"}}, {"f2", {"0", "1"}}}, std::move(classes));
}

Classifier binary_formula(const std::string& text) {
  auto theory = binary_pair({"0", "1"});
  PropFormula phi = parse_formula(text, *theory);
  return Classifier::formula(theory, std::move(phi), 1, 0);
}

}  // namespace

Classifier example1() {
  static const Classifier k = [] {
    auto theory = make_theory({{"t", {"hot", "mild", "freezing"}},
                               {"a", {"climbing", "reading", "skiing"}}},
                              {"beach", "mountain", "cinema"});
    // Rows in enumeration order: hot x {climbing, reading, skiing}, then mild, then freezing.
    return Classifier::table(theory, {0, 0, 0, 1, 2, 2, 2, 2, 1});
  }();
  return k;
}

Instance example1_instance(int i) {
  static const std::vector<std::vector<ValueId>> numbering = {
      {0, 0}, {1, 0}, {2, 1}, {2, 2}, {2, 0}, {0, 1}, {0, 2}, {1, 1}, {1, 2}};
  if (i < 1 || i > 9) throw Error(ErrorCode::InvalidArgument, "Example 1 has instances x1..x9");
  return Instance::from_values(numbering[static_cast<std::size_t>(i - 1)]);
}

Query example1_query(int i) { return Query::create(example1(), example1_instance(i)); }

Classifier appendix1() {
  static const Classifier k = Classifier::table(binary_pair({"c1", "c2", "c3"}), {0, 1, 1, 2});
  return k;
}

Classifier appendix2() {
  static const Classifier k = Classifier::table(binary_pair({"c1", "c2"}), {0, 0, 1, 0});
  return k;
}

Classifier two_by_three() {
  static const Classifier k = [] {
    auto theory = make_theory({{"a", {"0", "1"}}, {"b", {"0", "1", "2"}}}, {"0", "1"});
    return Classifier::table(theory, {0, 1, 0, 0, 0, 0});
  }();
  return k;
}

Classifier equivalence_formula() {
  static const Classifier k = binary_formula("f1 <-> f2");
  return k;
}

Classifier disjunction_formula() {
  static const Classifier k = binary_formula("f1 | f2");
  return k;
}

Instance instance(std::vector<ValueId> values) { return Instance::from_values(std::move(values)); }

std::vector<TheoryPtr> two_feature_theories() {
  std::vector<TheoryPtr> out;
  for (std::size_t d1 : {2u, 3u}) {
    for (std::size_t d2 : {2u, 3u}) {
      std::vector<std::string> v1;
      std::vector<std::string> v2;
      for (std::size_t v = 0; v < d1; ++v) v1.push_back(std::to_string(v));
      for (std::size_t v = 0; v < d2; ++v) v2.push_back(std::to_string(v));
      out.push_back(make_theory({{"f1", v1}, {"f2", v2}}, {"c1", "c2"}));
    }
  }
  return out;
}

}  // namespace cfx::builtin
