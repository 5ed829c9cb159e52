#pragma once

#include "bransport/traffic_plan.hpp"

namespace bransport {

// Witness that a plan is a concatenation of two operands: curve pairs with
// matched junction points whose projections recover the operands.
struct CurvePair {
    PolyCurve first, second;
    double mass = 0;
};

struct PairPlan {
    std::vector<CurvePair> pairs;
    double snap_tol = 1e-9;

    TrafficPlan project_first() const;
    TrafficPlan project_second() const;
    // Junction matching (condition (1) of the concatenation definition).
    void validate() const;
    friend PairPlan operator+(const PairPlan& a, const PairPlan& b);
};

// Joined polyline when the junction matches within tol; otherwise the
// constant curve at the origin.
PolyCurve conc_curves(const PolyCurve& c1, const PolyCurve& c2, double tol = 1e-9);

struct ConcResult {
    TrafficPlan plan;
    PairPlan witness;
};

// Canonical (product) concatenation of two plans over their shared marginal:
// at every intermediate point the incoming and outgoing fibers are paired
// proportionally.
ConcResult conc_plans(const TrafficPlan& p1, const TrafficPlan& p2, double tol = 1e-9);

// Concatenation through a Dirac intermediate realizing a prescribed coupling.
TrafficPlan conc_through_delta(const TrafficPlan& p1, const TrafficPlan& p2,
                               const Coupling& pi, double tol = 1e-9);

// Gluing of two couplings along the shared middle marginal.
TupleCoupling glue(const Coupling& pi1, const Coupling& pi2, double tol = 1e-9);
// Gluing of a tuple coupling with a coupling along tuple coordinate `coord`
// matched against the coupling's first coordinate; appends the coupling's
// second coordinate.
TupleCoupling glue_tuple(const TupleCoupling& tau, int coord, const Coupling& pi,
                         double tol = 1e-9);

struct TripleConcatResult {
    TrafficPlan plan;    // the final concatenation, coupling == p0
    TrafficPlan middle;  // the concatenation of p2 and p3 used inside
};

// Three-leg concatenation through a Dirac delta: builds the quadruple
// coupling by two gluings, realizes its (2,4)-projection through the delta,
// and concatenates with p1 fiberwise; the output coupling equals p0 exactly.
TripleConcatResult triple_concat(const Coupling& p0, const TrafficPlan& p1,
                                 const TrafficPlan& p2, const TrafficPlan& p3,
                                 double tol = 1e-9);

}  // namespace bransport
