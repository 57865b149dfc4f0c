#pragma once

#include <string>
#include <vector>

#include "cfx/classifier.hpp"

namespace cfx::builtin {

/// Example 1: t in {hot, mild, freezing}, a in {climbing, reading, skiing},
/// classes beach, mountain, cinema.
Classifier example1();
/// x1..x9 in the numbering of the worked example (1-based).
Instance example1_instance(int i);
Query example1_query(int i);

/// Two binary features f1, f2 and classes c1, c2, c3: (0,0) c1, (0,1) c2,
/// (1,0) c2, (1,1) c3. Instances are numbered x1..x4 in enumeration order.
Classifier appendix1();
/// Two binary features f1, f2 and classes c1, c2: only (1,0) is c2.
Classifier appendix2();
/// a in {0,1}, b in {0,1,2}; class 1 iff (a=0, b=1).
Classifier two_by_three();
/// f1 <-> f2 over two binary features, as a formula classifier (classes 1/0).
Classifier equivalence_formula();
/// f1 | f2 over two binary features, as a formula classifier (classes 1/0).
Classifier disjunction_formula();

/// Instance of a small theory from its value indices.
Instance instance(std::vector<ValueId> values);

/// Every theory with two features whose domain sizes are in {2, 3}, classes
/// {c1, c2}, features f1, f2 and values 0.. in order.
std::vector<TheoryPtr> two_feature_theories();

}  // namespace cfx::builtin
