#pragma once

#include <cstdint>

#include "bransport/competitor.hpp"
#include "bransport/solver.hpp"

namespace bransport {

// Reproducible random coupling inside the domain ball; with `min_separation`
// every source keeps at least that distance from every sink.
Coupling generate_instance(std::uint64_t seed, int n_pairs, const InstanceConfig& cfg,
                           double min_separation = 0.0);

// Deterministic perturbation schedule: per-atom displacement directions and
// mass jitters are drawn once from the seed, then scaled by 1/n.
struct PerturbationSpec {
    double displacement = 1.0;  // magnitude multiplying 1/n
    double mass_jitter = 0.0;   // relative jitter multiplying 1/n
    std::uint64_t seed = 1;
};

Coupling perturb_coupling(const Coupling& base, int n, const PerturbationSpec& pert,
                          const InstanceConfig& cfg);

struct StabilityExperiment {
    Coupling base;
    InstanceConfig config;
    PerturbationSpec pert;
    GridSpec grid;
    int n_max = 32;
    int verdict_window = 5;
    double verdict_tol = 0;  // 0: derived as 5*(1/n_max + pitch)
};

struct StabilityRow {
    int n = 0;
    bool solved = false;  // false marks a budget refusal
    double energy = 0;
    double bound = 0;  // E(limit) + connector certificates (continuum bound)
    double gap = 0;    // signed E(P_n) - E(limit)
    double eps1 = 0, eps2 = 0;
    double eps_bar = 0;
    bool grid_certified = false;  // competitors are continuum objects
    std::uint64_t support_hash = 0;
};

struct ExperimentReport {
    std::vector<StabilityRow> rows;
    double limit_energy = 0;
    std::uint64_t limit_support_hash = 0;
    bool limit_exhaustive = false;
    bool verdict = false;
    double verdict_tol = 0;
    double runtime_sec = 0;
};

// Solves the base coupling and every perturbed coupling exhaustively, builds
// competitor bundles in both directions and reports the two-sided squeeze.
ExperimentReport run_stability(const StabilityExperiment& exp);

}  // namespace bransport
