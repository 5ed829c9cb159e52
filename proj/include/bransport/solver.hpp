#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "bransport/traffic_plan.hpp"

namespace bransport {

struct GridSpec {
    double pitch = 0.1;
    double radius = 1.5;   // Steiner candidates fill the ball B(0,radius)
    bool complete = true;  // complete graph on the vertices, else k-nearest
    int knn = 8;
    int max_path_len = 2;
    std::uint64_t budget = 10'000'000;
};

// Terminals of the coupling plus a uniform Steiner grid inside the domain.
struct CandidateGraph {
    std::vector<Point> verts;  // terminals first
    int n_terminals = 0;
    bool complete = true;
    // Materialized only in k-nearest mode.
    std::vector<std::array<int, 2>> edges;
    std::vector<std::vector<int>> adj;

    static CandidateGraph build(const Coupling& pi, const GridSpec& spec);
    int find_vertex(const Point& p, double tol = 1e-9) const;
    std::vector<int> neighbors(int v) const;
};

enum class Certificate { exhaustive, local_optimum };

struct SolveResult {
    TrafficPlan plan;
    double energy = 0;  // alpha-mass of the returned assignment
    Certificate certificate = Certificate::local_optimum;
    std::uint64_t explored = 0;
    bool single_path_ok = true;
    std::vector<std::string> warnings;
};

// Globally minimal alpha-mass over all assignments of simple paths with at
// most max_path_len edges per coupling atom; ties broken lexicographically
// on the path-index tuple. Throws BudgetError beyond the assignment cap.
SolveResult solve_exact(const Coupling& pi, const CandidateGraph& g, double alpha,
                        int max_path_len, std::uint64_t budget = 10'000'000);

// Best-response reroute from the shortest-path assignment; deterministic
// given the seed (which fixes the processing order).
SolveResult solve_local(const Coupling& pi, const CandidateGraph& g, double alpha,
                        std::uint64_t seed = 0);

struct RefineResult {
    TrafficPlan plan;
    bool refined = false;  // false when the support is not a tree
    double energy = 0;
};

// Coordinate descent on the positions of degree->=3 non-terminal vertices,
// with collinear degree-2 vertices spliced out; combinatorics fixed,
// terminals fixed, energy never increases.
RefineResult refine_topology(const TrafficPlan& plan, double alpha);

}  // namespace bransport
