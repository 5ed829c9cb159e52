#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>

#include "bransport/connectors.hpp"

namespace bransport {

// One side of the cell decomposition: retained balls in retention order,
// cells C_i = B_i minus the earlier balls.
struct CellSide {
    std::vector<Ball> balls;
    DiscreteMeasure limit_marginal;
    // Index of the cell containing p, or -1.
    int cell_index(const Point& p) const;
    double cell_mass(const DiscreteMeasure& mu, int i) const;
    // Mass outside the union of retained balls.
    double outside_mass(const DiscreteMeasure& mu) const;
    int size() const { return static_cast<int>(balls.size()); }
};

struct CellDecomposition {
    CellSide minus, plus;
    double eps_bar = 0;
    double alpha = 0;
};

// Ball covers with certificate below eps_bar^alpha on each side; the minimal
// prefixes (largest covered mass first) retaining mass > 1 - eps_bar.
CellDecomposition build_cells(const DiscreteMeasure& mu_minus, const DiscreteMeasure& mu_plus,
                              double alpha, double eps_bar);

struct N0Check {
    bool ok = true;
    std::string witness;
};

// The three n0 conditions: cell masses at most doubled, outside mass at most
// 2*eps_bar, block discrepancies at most eps_bar/(N- N+).
N0Check verify_n0_conditions(const Coupling& pi_n, const Coupling& pi_m,
                             const CellDecomposition& cells, double eps_bar);

using BlockKey = std::pair<int, int>;

struct SplitPlan {
    std::map<BlockKey, TrafficPlan> blocks;  // rescaled blocks
    std::map<BlockKey, double> factors;
    std::map<BlockKey, double> raw_mass;
    TrafficPlan res1;  // rescale remainders
    TrafficPlan res2;  // atoms outside the retained cells
    TrafficPlan residual() const { return res1 + res2; }
    double residual_mass() const;
};

// Blocks by cell membership of the endpoints, rescaled by
// min(1, counterpart block mass / own block mass).
SplitPlan split_plan(const TrafficPlan& p, const CellDecomposition& cells,
                     const TrafficPlan& counterpart);

struct Connections {
    std::map<BlockKey, TrafficPlan> PI;    // mu~_n^{-,ij} -> mu~_m^{-,ij}
    std::map<BlockKey, TrafficPlan> PII;   // mu~_m^{+,ij} -> delta_{x_j}
    std::map<BlockKey, TrafficPlan> PIII;  // delta_{x_j} -> mu~_n^{+,ij}
    std::set<BlockKey> trivial;            // blocks whose couplings already agree
    double energy_PI = 0, energy_PII = 0, energy_PIII = 0;
};

// Per-ball mailing connectors (initial side) and per-ball irrigations through
// the ball centers (final side), decomposed into per-block pieces. Blocks
// whose n/m couplings coincide are connected by constant plans.
Connections build_connections(const SplitPlan& split_n, const SplitPlan& split_m,
                              const CellDecomposition& cells, double alpha);

struct ResidualConnectors {
    TrafficPlan PIres, PIIres, PIIIres;
    double energy = 0;
};

// Step-7 connectors routing the residuals through `center`.
ResidualConnectors build_residual_connectors(const SplitPlan& split_n, const SplitPlan& split_m,
                                             double alpha, const Point& center);

struct CompetitorBundle {
    TrafficPlan P1, P2, competitor;
    double e_P1 = 0, e_P2 = 0;  // exact certificates
    double eps_budget = 0;      // 14 C (1+diam) eps_bar^alpha
    double eps_bar = 0;
    double energy = 0;
    bool coupling_ok = false;
};

CompetitorBundle assemble_competitor(const Coupling& pi_n, const TrafficPlan& p_m,
                                     const SplitPlan& split_n, const SplitPlan& split_m,
                                     const CellDecomposition& cells, const Connections& conn,
                                     const ResidualConnectors& res, double alpha,
                                     double domain_diam);

// Full pipeline for one pair (pi_n, pi_m) against the limit coupling whose
// marginals define the cells (pass pi_m as limit for the m = infinity case).
CompetitorBundle build_competitor(const Coupling& pi_n, const Coupling& pi_m,
                                  const TrafficPlan& p_m, const Coupling& pi_limit,
                                  double alpha, double eps_bar, double domain_diam);

// Smallest eps_bar on a fixed ladder whose n0 conditions hold.
CompetitorBundle build_competitor_auto(const Coupling& pi_n, const Coupling& pi_m,
                                       const TrafficPlan& p_m, const Coupling& pi_limit,
                                       double alpha, double domain_diam,
                                       double* eps_bar_used = nullptr);

}  // namespace bransport
