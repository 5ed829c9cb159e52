#pragma once

#include "bransport/concat.hpp"
#include "bransport/traffic_plan.hpp"

namespace bransport {

// Explicit constant achieved by the dyadic construction:
// sqrt(d) * (1 + 2 / (1 - 2^{d(1-alpha)-1})); finite iff alpha > 1 - 1/d.
double connector_constant(double alpha, int d);

struct ConnectorReport {
    TrafficPlan plan;
    double energy = 0;             // E^alpha of the plan
    double bound = 0;              // certified upper bound
    double constant_achieved = 0;  // energy / (L * |mu|^alpha), 0 when degenerate
    double cube_side = 0;
    double total_mass = 0;
    // Instrumentation of the dyadic tree: cost and closed-form bound per level
    // (level k = edges leaving level-k cube centers), plus the root leg.
    std::vector<double> level_costs;
    std::vector<double> level_bounds;
    double root_cost = 0;
    double tree_cost = 0;
};

// Hierarchical dyadic plan irrigating mu from x0; energy bounded by
// connector_constant(alpha,d) * L * |mu|^alpha with L the bounding cube side.
ConnectorReport irrigate_from_point(const DiscreteMeasure& mu, const Point& x0, double alpha);

// Two dyadic legs concatenated through a point of the first marginal's
// support with prescribed coupling pi; diagonal atoms are realized as
// constant curves. Output coupling equals pi.
ConnectorReport mailing_connector(const Coupling& pi, double alpha);

struct Ball {
    Point center;
    double radius = 0;
    double covered_mass = 0;
};

struct BallCover {
    std::vector<Ball> balls;
    double certificate = 0;  // sum of r_i * mu(B_i)^alpha (grid mode: density estimate)
    double eps = 0;
    bool grid_mode = false;
    double r0 = 0;
    double covered_mass = 0;
    double total_mass = 0;
};

// Atomic covering: one ball per atom, radii from the geometric budget
// eps/2^{i+1} capped by half the nearest-atom distance, so balls are
// disjoint, carry zero boundary mass and sum below eps.
BallCover ball_cover(const DiscreteMeasure& mu, double alpha, double eps);

// Uniform density on an axis-aligned box.
struct GridDensity {
    Point lo, hi;
    double density = 1.0;
    double volume() const;
    double total() const { return density * volume(); }
};

// Grid covering with balls of one radius r0 chosen from the supercritical
// exponent 1 + alpha*d - d; refused when the exponent is nonpositive.
BallCover ball_cover(const GridDensity& mu, double alpha, double eps);

}  // namespace bransport
