#pragma once

#include <optional>

#include "cfx/derived.hpp"
#include "cfx/sat.hpp"

namespace cfx {

/// The formula reifying "kappa(y) = c": phi for the true class, !phi for the
/// false class. Throws UnknownClass for any other class and InvalidArgument
/// for a table classifier.
PropFormula class_indicator(const Classifier& k, ClassId c);

/// Membership with oracle calls in place of enumeration. Needs a formula
/// classifier over a boolean theory (NotBoolean otherwise). Ld needs a
/// separable distance (Hamming when null); LdTau accepts any distance.
///
/// Oracle calls: none for cSuf, sNec, LdTau; one for gSuf and sSuf; at most
/// |E| for gNec; at most one for Lwf, Lc and Ld.
bool decide_exp(ExplainerKind kind, const Query& q, const PartialAssignment& e,
                sat::SatOracle& oracle, const DistanceMeasure* dd = nullptr,
                double tau = kInfinity);

/// One explanation of the requested kind, or nullopt when there is none.
///
/// Oracle calls: none for sSuf; one for cSuf, gSuf and sNec; at most n for
/// gNec and Lwf; at most n for Lc; Ld descends through strictly decreasing
/// distances; LdTau takes one call.
std::optional<PartialAssignment> find_exp(ExplainerKind kind, const Query& q,
                                          sat::SatOracle& oracle,
                                          const DistanceMeasure* dd = nullptr,
                                          double tau = kInfinity);

}  // namespace cfx
