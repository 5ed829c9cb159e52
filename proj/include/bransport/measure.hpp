#pragma once

#include <string>
#include <vector>

#include "bransport/geometry.hpp"

namespace bransport {

struct WeightedPoint {
    Point x;
    double w = 0;
};

// Finite atomic measure in canonical form: atoms lexicographically sorted,
// near-duplicates (within a position tolerance) merged, nonpositive masses
// rejected.
class DiscreteMeasure {
  public:
    DiscreteMeasure() = default;
    DiscreteMeasure(std::vector<WeightedPoint> atoms, double pos_tol = 1e-9);
    static DiscreteMeasure dirac(Point x, double mass);

    const std::vector<WeightedPoint>& atoms() const { return atoms_; }
    bool empty() const { return atoms_.empty(); }
    std::size_t size() const { return atoms_.size(); }
    double total() const;
    double mass_at(const Point& p, double pos_tol = 1e-9) const;
    DiscreteMeasure scaled(double s) const;
    bool approx_equal(const DiscreteMeasure& other, double pos_tol = 1e-9,
                      double mass_tol = 1e-12) const;
    // True when the whole mass sits at a single point (returned through *at).
    bool is_dirac(Point* at, double pos_tol = 1e-9) const;

    friend DiscreteMeasure operator+(const DiscreteMeasure& a, const DiscreteMeasure& b);

  private:
    std::vector<WeightedPoint> atoms_;
};

struct CouplingAtom {
    Point src, dst;
    double mass = 0;
};

// Finite atomic measure on pairs (source, target); canonical form as above
// with lexicographic order on (src, dst).
class Coupling {
  public:
    Coupling() = default;
    Coupling(std::vector<CouplingAtom> atoms, double pos_tol = 1e-9);

    const std::vector<CouplingAtom>& atoms() const { return atoms_; }
    bool empty() const { return atoms_.empty(); }
    std::size_t size() const { return atoms_.size(); }
    double total() const;
    DiscreteMeasure first_marginal(double pos_tol = 1e-9) const;
    DiscreteMeasure second_marginal(double pos_tol = 1e-9) const;
    double mass_at(const Point& src, const Point& dst, double pos_tol = 1e-9) const;
    Coupling scaled(double s) const;
    Coupling transposed() const;
    bool approx_equal(const Coupling& other, double pos_tol = 1e-9,
                      double mass_tol = 1e-12) const;
    // Human-readable first differing atom against `other`; empty if equal.
    std::string first_difference(const Coupling& other, double pos_tol = 1e-9,
                                 double mass_tol = 1e-12) const;

    friend Coupling operator+(const Coupling& a, const Coupling& b);

  private:
    std::vector<CouplingAtom> atoms_;
};

// Product coupling with marginals mu and nu (same total mass): mass
// mu(x)nu(y)/|mu| at (x,y).
Coupling product_coupling(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                          double mass_tol = 1e-9);
// Identity coupling of a measure with itself.
Coupling diagonal_coupling(const DiscreteMeasure& mu);

// Atomic measure on k-tuples of points; used by the gluing constructions.
class TupleCoupling {
  public:
    struct Atom {
        std::vector<Point> pts;
        double mass = 0;
    };

    TupleCoupling(int arity, std::vector<Atom> atoms = {});
    int arity() const { return arity_; }
    const std::vector<Atom>& atoms() const { return atoms_; }
    double total() const;
    Coupling project(int i, int j, double pos_tol = 1e-9) const;
    DiscreteMeasure marginal(int i, double pos_tol = 1e-9) const;

  private:
    int arity_;
    std::vector<Atom> atoms_;
};

}  // namespace bransport
