#pragma once

#include <memory>
#include <unordered_map>
#include <utility>
#include <vector>

#include "bransport/measure.hpp"
#include "bransport/network.hpp"

namespace bransport {

struct InstanceConfig {
    int d = 2;
    double R = 1.5;        // domain ball radius
    double alpha = 0.9;    // cost exponent in (0,1]
    double C_stop = 10.0;  // TP_C bound
    bool supercritical() const { return alpha > 1.0 - 1.0 / d; }
    double snap_tol() const { return 1e-9 * R; }
    void validate() const;
};

struct Atom {
    PolyCurve curve;
    double mass = 0;
};

// Per-edge multiplicity |.|_P: mass of atoms passing through an edge, each
// atom counted once regardless of repeated traversals.
using MultiplicityField = std::unordered_map<int, double>;

// A finite weighted family of polyline curves on a shared embedded network.
// Atoms are canonicalized (sorted, exact-duplicate curves merged) and the
// network is built at construction; the value is immutable afterwards.
class TrafficPlan {
  public:
    TrafficPlan() = default;
    explicit TrafficPlan(std::vector<Atom> atoms, double snap_tol = 1e-9,
                         double domain_radius = 0.0);

    const std::vector<Atom>& atoms() const { return atoms_; }
    bool empty() const { return atoms_.empty(); }
    std::size_t size() const { return atoms_.size(); }
    double total_mass() const;
    double snap_tol() const { return snap_tol_; }
    double domain_radius() const { return domain_radius_; }

    const Network& network() const;
    const std::vector<EdgeStep>& path(std::size_t atom) const;
    const MultiplicityField& multiplicity() const;
    double multiplicity_at(const Point& p) const;

    TrafficPlan scaled(double s) const;
    TrafficPlan reversed() const;
    friend TrafficPlan operator+(const TrafficPlan& a, const TrafficPlan& b);

    bool approx_equal(const TrafficPlan& other, double pos_tol = 1e-9,
                      double mass_tol = 1e-12) const;

    // Constant plan sitting on the atoms of mu.
    static TrafficPlan constant(const DiscreteMeasure& mu, double snap_tol = 1e-9);

  private:
    struct Registration {
        Network net{1e-9, 0.0};
        std::vector<std::vector<EdgeStep>> paths;
        MultiplicityField mult;
    };
    void build();

    std::vector<Atom> atoms_;
    double snap_tol_ = 1e-9;
    double domain_radius_ = 0.0;
    std::shared_ptr<const Registration> reg_;
};

Coupling coupling_of(const TrafficPlan& p);
std::pair<DiscreteMeasure, DiscreteMeasure> marginals(const TrafficPlan& p);
DiscreteMeasure irrigating_measure(const TrafficPlan& p);
DiscreteMeasure irrigated_measure(const TrafficPlan& p);

// E^alpha: every traversal of every edge is charged len * mult^(alpha-1).
double alpha_energy(const TrafficPlan& p, double alpha);
// M^alpha: sum over edges of len * mult^alpha.
double alpha_mass(const TrafficPlan& p, double alpha);
// Mass-weighted total stopping time bounded by C.
bool check_tpc(const TrafficPlan& p, double C);
// Every positive-mass atom has double points of length zero.
bool check_simple_path(const TrafficPlan& p);

struct SinglePathWitness {
    bool ok = true;
    Point x, y;
    int atom_a = -1, atom_b = -1;
};
// All subpaths between two shared points traverse the same edge set (up to
// orientation).
SinglePathWitness check_single_path(const TrafficPlan& p);

// Lemma-style plan decomposition: split p into plans whose couplings are the
// given product parts (respectively arbitrary coupling parts). Fibers are
// split proportionally, so the pieces sum back to p atom-by-atom.
std::vector<TrafficPlan> decompose_by_products(
    const TrafficPlan& p, const std::vector<std::pair<DiscreteMeasure, DiscreteMeasure>>& parts);
std::vector<TrafficPlan> decompose_by_couplings(const TrafficPlan& p,
                                                const std::vector<Coupling>& parts);

}  // namespace bransport
