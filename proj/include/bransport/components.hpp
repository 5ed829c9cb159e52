#pragma once

#include <cstdint>
#include <unordered_map>

#include "bransport/solver.hpp"
#include "bransport/traffic_plan.hpp"

namespace bransport {

// U = R^d minus finitely many points (empty list gives U = R^d).
struct OpenSetSpec {
    std::vector<Point> removed_points;
};

struct RestrictionRecord {
    int atom = -1;
    double phi1 = 0, phi2 = 0;
};

struct ComponentRecord {
    std::vector<int> edges;  // edge ids in the split network
    TrafficPlan plan;        // canonical restricted plan Q_n
    std::vector<RestrictionRecord> restrictions;
    std::unordered_map<int, double> mult;  // Q_n multiplicity on split edges
};

// Copy of the plan's network with the removed points inserted as (dead)
// vertices; discrete multiplicity is by definition the mass of atoms
// covering a point, so the rectifiable-multiplicity identity theta(x) =
// P({x in M_gamma}) needs no separate operation here.
struct SplitNetworkView {
    std::vector<Point> verts;
    struct E {
        int a = -1, b = -1;
        double len = 0;
    };
    std::vector<E> edges;
    std::vector<char> removed;              // per vertex
    std::unordered_map<int, double> mult;   // parent plan multiplicity per edge
    std::vector<std::vector<EdgeStep>> paths;
};

struct ComponentDecomposition {
    SplitNetworkView net;
    std::vector<ComponentRecord> comps;
};

// Connected components of the positive-multiplicity edge graph after
// splitting edges at the removed points; per atom the visit times of each
// component must form one interval (hard failure otherwise). Requires a
// simple-path, single-path plan.
ComponentDecomposition connected_components(const TrafficPlan& p, const OpenSetSpec& u);

// mult_{Q_n} == mult_p on F_n and 0 elsewhere, exactly.
bool component_multiplicity_check(const TrafficPlan& p, const ComponentDecomposition& dec);

struct AuditEntry {
    std::vector<int> comps;
    double energy = 0;
    double oracle_energy = 0;
    bool ok = true;
};

struct AuditReport {
    std::vector<AuditEntry> entries;
    bool all_ok = true;
    bool partial = false;  // budget ran out before all pairs were audited
};

// Re-solves each component (and pairs within budget) against the exhaustive
// oracle; a component beating its oracle would falsify the discrete model.
AuditReport component_optimality_audit(const TrafficPlan& p, const ComponentDecomposition& dec,
                                       const GridSpec& oracle_spec, double alpha,
                                       std::uint64_t budget = 64);

struct FinitenessResult {
    int count = 0;
    std::vector<double> floors;    // per-component energy floor
    std::vector<double> energies;  // per-component energy
    double count_bound = 0;        // E(p) / min floor
};

// Component count of p in R^d \ {x} with the quantitative energy floor
// min(min_length, reach from x) * (smallest atom mass)^alpha per component.
FinitenessResult finiteness_experiment(const TrafficPlan& p, const Point& x, double min_length,
                                       double alpha);

}  // namespace bransport
