#include "bransport/measure.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace bransport {

namespace {

std::string format_point(const Point& p) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < p.size(); ++i) os << (i ? "," : "") << p[i];
    os << ")";
    return os.str();
}

}  // namespace

DiscreteMeasure::DiscreteMeasure(std::vector<WeightedPoint> atoms, double pos_tol) {
    for (const auto& a : atoms)
        if (!(a.w > 0)) throw std::invalid_argument("DiscreteMeasure: nonpositive mass");
    std::sort(atoms.begin(), atoms.end(),
              [](const WeightedPoint& a, const WeightedPoint& b) { return lex_less(a.x, b.x); });
    for (auto& a : atoms) {
        if (!atoms_.empty() && approx_point(atoms_.back().x, a.x, pos_tol))
            atoms_.back().w += a.w;
        else
            atoms_.push_back(std::move(a));
    }
}

DiscreteMeasure DiscreteMeasure::dirac(Point x, double mass) {
    return DiscreteMeasure({{std::move(x), mass}});
}

double DiscreteMeasure::total() const {
    double s = 0;
    for (const auto& a : atoms_) s += a.w;
    return s;
}

double DiscreteMeasure::mass_at(const Point& p, double pos_tol) const {
    double s = 0;
    for (const auto& a : atoms_)
        if (approx_point(a.x, p, pos_tol)) s += a.w;
    return s;
}

DiscreteMeasure DiscreteMeasure::scaled(double s) const {
    if (s == 0) return {};
    DiscreteMeasure out;
    out.atoms_ = atoms_;
    for (auto& a : out.atoms_) a.w *= s;
    return out;
}

bool DiscreteMeasure::approx_equal(const DiscreteMeasure& other, double pos_tol,
                                   double mass_tol) const {
    if (atoms_.size() != other.atoms_.size()) return false;
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
        if (!approx_point(atoms_[i].x, other.atoms_[i].x, pos_tol)) return false;
        if (std::fabs(atoms_[i].w - other.atoms_[i].w) > mass_tol) return false;
    }
    return true;
}

bool DiscreteMeasure::is_dirac(Point* at, double pos_tol) const {
    if (atoms_.empty()) return false;
    for (const auto& a : atoms_)
        if (!approx_point(a.x, atoms_.front().x, pos_tol)) return false;
    if (at) *at = atoms_.front().x;
    return true;
}

DiscreteMeasure operator+(const DiscreteMeasure& a, const DiscreteMeasure& b) {
    std::vector<WeightedPoint> atoms = a.atoms_;
    atoms.insert(atoms.end(), b.atoms_.begin(), b.atoms_.end());
    return DiscreteMeasure(std::move(atoms));
}

Coupling::Coupling(std::vector<CouplingAtom> atoms, double pos_tol) {
    for (const auto& a : atoms)
        if (!(a.mass > 0)) throw std::invalid_argument("Coupling: nonpositive mass");
    std::sort(atoms.begin(), atoms.end(), [](const CouplingAtom& a, const CouplingAtom& b) {
        if (a.src != b.src) return lex_less(a.src, b.src);
        return lex_less(a.dst, b.dst);
    });
    for (auto& a : atoms) {
        if (!atoms_.empty() && approx_point(atoms_.back().src, a.src, pos_tol) &&
            approx_point(atoms_.back().dst, a.dst, pos_tol))
            atoms_.back().mass += a.mass;
        else
            atoms_.push_back(std::move(a));
    }
}

double Coupling::total() const {
    double s = 0;
    for (const auto& a : atoms_) s += a.mass;
    return s;
}

DiscreteMeasure Coupling::first_marginal(double pos_tol) const {
    std::vector<WeightedPoint> pts;
    pts.reserve(atoms_.size());
    for (const auto& a : atoms_) pts.push_back({a.src, a.mass});
    return pts.empty() ? DiscreteMeasure() : DiscreteMeasure(std::move(pts), pos_tol);
}

DiscreteMeasure Coupling::second_marginal(double pos_tol) const {
    std::vector<WeightedPoint> pts;
    pts.reserve(atoms_.size());
    for (const auto& a : atoms_) pts.push_back({a.dst, a.mass});
    return pts.empty() ? DiscreteMeasure() : DiscreteMeasure(std::move(pts), pos_tol);
}

double Coupling::mass_at(const Point& src, const Point& dst, double pos_tol) const {
    double s = 0;
    for (const auto& a : atoms_)
        if (approx_point(a.src, src, pos_tol) && approx_point(a.dst, dst, pos_tol)) s += a.mass;
    return s;
}

Coupling Coupling::scaled(double s) const {
    if (s == 0) return {};
    Coupling out;
    out.atoms_ = atoms_;
    for (auto& a : out.atoms_) a.mass *= s;
    return out;
}

Coupling Coupling::transposed() const {
    std::vector<CouplingAtom> atoms;
    atoms.reserve(atoms_.size());
    for (const auto& a : atoms_) atoms.push_back({a.dst, a.src, a.mass});
    return atoms.empty() ? Coupling() : Coupling(std::move(atoms));
}

bool Coupling::approx_equal(const Coupling& other, double pos_tol, double mass_tol) const {
    return first_difference(other, pos_tol, mass_tol).empty();
}

std::string Coupling::first_difference(const Coupling& other, double pos_tol,
                                       double mass_tol) const {
    std::size_t n = std::max(atoms_.size(), other.atoms_.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (i >= atoms_.size() || i >= other.atoms_.size()) {
            const CouplingAtom& a = i < atoms_.size() ? atoms_[i] : other.atoms_[i];
            std::ostringstream os;
            os << "atom count mismatch at " << format_point(a.src) << "->"
               << format_point(a.dst);
            return os.str();
        }
        const CouplingAtom& a = atoms_[i];
        const CouplingAtom& b = other.atoms_[i];
        if (!approx_point(a.src, b.src, pos_tol) || !approx_point(a.dst, b.dst, pos_tol) ||
            std::fabs(a.mass - b.mass) > mass_tol) {
            std::ostringstream os;
            os << "atom " << i << ": " << format_point(a.src) << "->" << format_point(a.dst)
               << " mass " << a.mass << " vs " << format_point(b.src) << "->"
               << format_point(b.dst) << " mass " << b.mass;
            return os.str();
        }
    }
    return {};
}

Coupling operator+(const Coupling& a, const Coupling& b) {
    std::vector<CouplingAtom> atoms = a.atoms_;
    atoms.insert(atoms.end(), b.atoms_.begin(), b.atoms_.end());
    return atoms.empty() ? Coupling() : Coupling(std::move(atoms));
}

Coupling product_coupling(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                          double mass_tol) {
    double m = mu.total(), n = nu.total();
    if (std::fabs(m - n) > mass_tol)
        throw std::invalid_argument("product_coupling: marginals have different total mass");
    if (mu.empty() || nu.empty()) return {};
    std::vector<CouplingAtom> atoms;
    atoms.reserve(mu.size() * nu.size());
    for (const auto& a : mu.atoms())
        for (const auto& b : nu.atoms()) atoms.push_back({a.x, b.x, a.w * b.w / m});
    return Coupling(std::move(atoms));
}

Coupling diagonal_coupling(const DiscreteMeasure& mu) {
    if (mu.empty()) return {};
    std::vector<CouplingAtom> atoms;
    atoms.reserve(mu.size());
    for (const auto& a : mu.atoms()) atoms.push_back({a.x, a.x, a.w});
    return Coupling(std::move(atoms));
}

TupleCoupling::TupleCoupling(int arity, std::vector<Atom> atoms)
    : arity_(arity), atoms_(std::move(atoms)) {
    for (const auto& a : atoms_) {
        if (static_cast<int>(a.pts.size()) != arity_)
            throw std::invalid_argument("TupleCoupling: wrong arity");
        if (!(a.mass > 0)) throw std::invalid_argument("TupleCoupling: nonpositive mass");
    }
}

double TupleCoupling::total() const {
    double s = 0;
    for (const auto& a : atoms_) s += a.mass;
    return s;
}

Coupling TupleCoupling::project(int i, int j, double pos_tol) const {
    std::vector<CouplingAtom> atoms;
    atoms.reserve(atoms_.size());
    for (const auto& a : atoms_)
        atoms.push_back({a.pts[static_cast<std::size_t>(i)],
                         a.pts[static_cast<std::size_t>(j)], a.mass});
    return atoms.empty() ? Coupling() : Coupling(std::move(atoms), pos_tol);
}

DiscreteMeasure TupleCoupling::marginal(int i, double pos_tol) const {
    std::vector<WeightedPoint> pts;
    pts.reserve(atoms_.size());
    for (const auto& a : atoms_) pts.push_back({a.pts[static_cast<std::size_t>(i)], a.mass});
    return pts.empty() ? DiscreteMeasure() : DiscreteMeasure(std::move(pts), pos_tol);
}

}  // namespace bransport
