#include "bransport/concat.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "bransport/errors.hpp"

namespace bransport {

namespace {

std::string fmt_point(const Point& p) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < p.size(); ++i) os << (i ? "," : "") << p[i];
    os << ")";
    return os.str();
}

// Index of p in pts within tol, or -1.
int point_index(const std::vector<Point>& pts, const Point& p, double tol) {
    for (std::size_t i = 0; i < pts.size(); ++i)
        if (approx_point(pts[i], p, tol)) return static_cast<int>(i);
    return -1;
}

int point_index_or_add(std::vector<Point>& pts, const Point& p, double tol) {
    int i = point_index(pts, p, tol);
    if (i >= 0) return i;
    pts.push_back(p);
    return static_cast<int>(pts.size()) - 1;
}

}  // namespace

TrafficPlan PairPlan::project_first() const {
    std::vector<Atom> atoms;
    atoms.reserve(pairs.size());
    for (const CurvePair& p : pairs) atoms.push_back({p.first, p.mass});
    return atoms.empty() ? TrafficPlan() : TrafficPlan(std::move(atoms), snap_tol);
}

TrafficPlan PairPlan::project_second() const {
    std::vector<Atom> atoms;
    atoms.reserve(pairs.size());
    for (const CurvePair& p : pairs) atoms.push_back({p.second, p.mass});
    return atoms.empty() ? TrafficPlan() : TrafficPlan(std::move(atoms), snap_tol);
}

void PairPlan::validate() const {
    for (const CurvePair& p : pairs) {
        if (!(p.mass > 0)) throw std::invalid_argument("PairPlan: nonpositive mass");
        if (!approx_point(p.first.end(), p.second.start(), snap_tol))
            throw std::invalid_argument("PairPlan: junction mismatch at " +
                                        fmt_point(p.first.end()));
    }
}

PairPlan operator+(const PairPlan& a, const PairPlan& b) {
    PairPlan out;
    out.snap_tol = std::min(a.snap_tol, b.snap_tol);
    out.pairs = a.pairs;
    out.pairs.insert(out.pairs.end(), b.pairs.begin(), b.pairs.end());
    return out;
}

PolyCurve conc_curves(const PolyCurve& c1, const PolyCurve& c2, double tol) {
    if (!approx_point(c1.end(), c2.start(), tol))
        return PolyCurve::constant(origin(c1.dim()));
    std::vector<Point> vs = c1.vertices();
    const auto& w = c2.vertices();
    vs.insert(vs.end(), w.begin(), w.end());
    return PolyCurve(std::move(vs), tol);
}

ConcResult conc_plans(const TrafficPlan& p1, const TrafficPlan& p2, double tol) {
    ConcResult out;
    out.witness.snap_tol = tol;
    if (p1.empty() && p2.empty()) return out;
    DiscreteMeasure nu1 = irrigated_measure(p1);
    DiscreteMeasure nu2 = irrigating_measure(p2);
    if (!nu1.approx_equal(nu2, tol, 1e-12)) {
        std::string at = "?";
        for (const auto& a : nu1.atoms())
            if (std::fabs(nu2.mass_at(a.x, tol) - a.w) > 1e-12) {
                at = fmt_point(a.x);
                break;
            }
        throw std::invalid_argument("conc_plans: intermediate marginal mismatch at " + at);
    }
    // Fibers per intermediate point.
    std::vector<Point> pts;
    std::vector<std::vector<std::size_t>> in_fiber, out_fiber;
    for (std::size_t i = 0; i < p1.size(); ++i) {
        int k = point_index_or_add(pts, p1.atoms()[i].curve.end(), tol);
        if (static_cast<std::size_t>(k) >= in_fiber.size()) {
            in_fiber.resize(static_cast<std::size_t>(k) + 1);
            out_fiber.resize(static_cast<std::size_t>(k) + 1);
        }
        in_fiber[static_cast<std::size_t>(k)].push_back(i);
    }
    for (std::size_t j = 0; j < p2.size(); ++j) {
        int k = point_index(pts, p2.atoms()[j].curve.start(), tol);
        if (k < 0) throw std::invalid_argument("conc_plans: stray outgoing fiber");
        out_fiber[static_cast<std::size_t>(k)].push_back(j);
    }
    std::vector<Atom> atoms;
    for (std::size_t k = 0; k < pts.size(); ++k) {
        double nu = 0;
        for (std::size_t i : in_fiber[k]) nu += p1.atoms()[i].mass;
        if (nu <= 0) continue;
        for (std::size_t i : in_fiber[k]) {
            for (std::size_t j : out_fiber[k]) {
                double m = p1.atoms()[i].mass * p2.atoms()[j].mass / nu;
                PolyCurve c = conc_curves(p1.atoms()[i].curve, p2.atoms()[j].curve, tol);
                atoms.push_back({c, m});
                out.witness.pairs.push_back({p1.atoms()[i].curve, p2.atoms()[j].curve, m});
            }
        }
    }
    if (!atoms.empty())
        out.plan = TrafficPlan(std::move(atoms), std::min(p1.snap_tol(), p2.snap_tol()),
                               std::max(p1.domain_radius(), p2.domain_radius()));
    return out;
}

TrafficPlan conc_through_delta(const TrafficPlan& p1, const TrafficPlan& p2,
                               const Coupling& pi, double tol) {
    if (pi.empty()) {
        if (!p1.empty() || !p2.empty())
            throw std::invalid_argument("conc_through_delta: empty coupling, nonempty plans");
        return {};
    }
    Point x1, x2;
    if (!irrigated_measure(p1).is_dirac(&x1, tol))
        throw std::invalid_argument("conc_through_delta: final marginal of p1 is not a Dirac");
    if (!irrigating_measure(p2).is_dirac(&x2, tol))
        throw std::invalid_argument("conc_through_delta: initial marginal of p2 is not a Dirac");
    if (!approx_point(x1, x2, tol))
        throw std::invalid_argument("conc_through_delta: Dirac points differ");
    if (!pi.first_marginal(tol).approx_equal(irrigating_measure(p1), tol, 1e-9))
        throw std::invalid_argument("conc_through_delta: first marginal mismatch");
    if (!pi.second_marginal(tol).approx_equal(irrigated_measure(p2), tol, 1e-9))
        throw std::invalid_argument("conc_through_delta: second marginal mismatch");

    // Fibers of p1 by start point and of p2 by end point.
    std::vector<Point> starts, ends;
    std::vector<std::vector<std::size_t>> f1, f2;
    for (std::size_t i = 0; i < p1.size(); ++i) {
        int k = point_index_or_add(starts, p1.atoms()[i].curve.start(), tol);
        if (static_cast<std::size_t>(k) >= f1.size()) f1.resize(static_cast<std::size_t>(k) + 1);
        f1[static_cast<std::size_t>(k)].push_back(i);
    }
    for (std::size_t j = 0; j < p2.size(); ++j) {
        int k = point_index_or_add(ends, p2.atoms()[j].curve.end(), tol);
        if (static_cast<std::size_t>(k) >= f2.size()) f2.resize(static_cast<std::size_t>(k) + 1);
        f2[static_cast<std::size_t>(k)].push_back(j);
    }
    std::vector<Atom> atoms;
    for (const CouplingAtom& ca : pi.atoms()) {
        int kx = point_index(starts, ca.src, tol);
        int ky = point_index(ends, ca.dst, tol);
        if (kx < 0 || ky < 0)
            throw std::invalid_argument("conc_through_delta: coupling atom with empty fiber at " +
                                        fmt_point(ca.src) + "->" + fmt_point(ca.dst));
        double A = 0, B = 0;
        for (std::size_t i : f1[static_cast<std::size_t>(kx)]) A += p1.atoms()[i].mass;
        for (std::size_t j : f2[static_cast<std::size_t>(ky)]) B += p2.atoms()[j].mass;
        for (std::size_t i : f1[static_cast<std::size_t>(kx)]) {
            for (std::size_t j : f2[static_cast<std::size_t>(ky)]) {
                double m = ca.mass * (p1.atoms()[i].mass / A) * (p2.atoms()[j].mass / B);
                atoms.push_back({conc_curves(p1.atoms()[i].curve, p2.atoms()[j].curve, tol), m});
            }
        }
    }
    return TrafficPlan(std::move(atoms), std::min(p1.snap_tol(), p2.snap_tol()),
                       std::max(p1.domain_radius(), p2.domain_radius()));
}

TupleCoupling glue(const Coupling& pi1, const Coupling& pi2, double tol) {
    if (!pi1.second_marginal(tol).approx_equal(pi2.first_marginal(tol), tol, 1e-12))
        throw std::invalid_argument("glue: middle marginals differ");
    std::vector<Point> mids;
    std::vector<std::vector<std::size_t>> into, outof;
    for (std::size_t i = 0; i < pi1.size(); ++i) {
        int k = point_index_or_add(mids, pi1.atoms()[i].dst, tol);
        if (static_cast<std::size_t>(k) >= into.size()) {
            into.resize(static_cast<std::size_t>(k) + 1);
            outof.resize(static_cast<std::size_t>(k) + 1);
        }
        into[static_cast<std::size_t>(k)].push_back(i);
    }
    for (std::size_t j = 0; j < pi2.size(); ++j) {
        int k = point_index(mids, pi2.atoms()[j].src, tol);
        if (k < 0) throw std::invalid_argument("glue: stray atom in second coupling");
        outof[static_cast<std::size_t>(k)].push_back(j);
    }
    std::vector<TupleCoupling::Atom> atoms;
    for (std::size_t k = 0; k < mids.size(); ++k) {
        double nu = 0;
        for (std::size_t i : into[k]) nu += pi1.atoms()[i].mass;
        if (nu <= 0) continue;
        for (std::size_t i : into[k])
            for (std::size_t j : outof[k])
                atoms.push_back({{pi1.atoms()[i].src, mids[k], pi2.atoms()[j].dst},
                                 pi1.atoms()[i].mass * pi2.atoms()[j].mass / nu});
    }
    return TupleCoupling(3, std::move(atoms));
}

TupleCoupling glue_tuple(const TupleCoupling& tau, int coord, const Coupling& pi, double tol) {
    if (!tau.marginal(coord, tol).approx_equal(pi.first_marginal(tol), tol, 1e-12))
        throw std::invalid_argument("glue_tuple: shared marginals differ");
    std::vector<Point> keys;
    std::vector<std::vector<std::size_t>> tatoms, patoms;
    for (std::size_t i = 0; i < tau.atoms().size(); ++i) {
        int k = point_index_or_add(keys, tau.atoms()[i].pts[static_cast<std::size_t>(coord)], tol);
        if (static_cast<std::size_t>(k) >= tatoms.size()) {
            tatoms.resize(static_cast<std::size_t>(k) + 1);
            patoms.resize(static_cast<std::size_t>(k) + 1);
        }
        tatoms[static_cast<std::size_t>(k)].push_back(i);
    }
    for (std::size_t j = 0; j < pi.size(); ++j) {
        int k = point_index(keys, pi.atoms()[j].src, tol);
        if (k < 0) throw std::invalid_argument("glue_tuple: stray coupling atom");
        patoms[static_cast<std::size_t>(k)].push_back(j);
    }
    std::vector<TupleCoupling::Atom> atoms;
    for (std::size_t k = 0; k < keys.size(); ++k) {
        double nu = 0;
        for (std::size_t i : tatoms[k]) nu += tau.atoms()[i].mass;
        if (nu <= 0) continue;
        for (std::size_t i : tatoms[k]) {
            for (std::size_t j : patoms[k]) {
                TupleCoupling::Atom a;
                a.pts = tau.atoms()[i].pts;
                a.pts.push_back(pi.atoms()[j].dst);
                a.mass = tau.atoms()[i].mass * pi.atoms()[j].mass / nu;
                atoms.push_back(std::move(a));
            }
        }
    }
    return TupleCoupling(tau.arity() + 1, std::move(atoms));
}

TripleConcatResult triple_concat(const Coupling& p0, const TrafficPlan& p1,
                                 const TrafficPlan& p2, const TrafficPlan& p3, double tol) {
    // Stage checks, earliest first.
    if (!irrigated_measure(p1).approx_equal(irrigating_measure(p2), tol, 1e-9))
        throw std::invalid_argument("triple_concat: stage p1->p2 marginal mismatch");
    Point x0a, x0b;
    if (!irrigated_measure(p2).is_dirac(&x0a, tol))
        throw std::invalid_argument("triple_concat: stage p2 final marginal is not a Dirac");
    if (!irrigating_measure(p3).is_dirac(&x0b, tol) || !approx_point(x0a, x0b, tol))
        throw std::invalid_argument("triple_concat: stage p3 initial marginal mismatch");
    if (!p0.first_marginal(tol).approx_equal(irrigating_measure(p1), tol, 1e-9))
        throw std::invalid_argument("triple_concat: stage p0 first marginal mismatch");
    if (!p0.second_marginal(tol).approx_equal(irrigated_measure(p3), tol, 1e-9))
        throw std::invalid_argument("triple_concat: stage p0 second marginal mismatch");

    Coupling pi1 = coupling_of(p1);
    Coupling pi2 = coupling_of(p2);
    TupleCoupling tau = glue(pi1, pi2, tol);            // (x, y, x0)
    TupleCoupling quad = glue_tuple(tau, 0, p0, tol);   // (x, y, x0, w)
    Coupling pi4 = quad.project(1, 3, tol);
    TrafficPlan p4 = conc_through_delta(p2, p3, pi4, tol);

    // Fibers of p1 and p4 over endpoint pairs.
    auto fiber_map = [&](const TrafficPlan& p) {
        std::vector<std::pair<Point, Point>> keys;
        std::vector<std::vector<std::size_t>> fibers;
        std::vector<double> totals;
        for (std::size_t i = 0; i < p.size(); ++i) {
            const Point& s = p.atoms()[i].curve.start();
            const Point& e = p.atoms()[i].curve.end();
            int found = -1;
            for (std::size_t k = 0; k < keys.size(); ++k)
                if (approx_point(keys[k].first, s, tol) && approx_point(keys[k].second, e, tol)) {
                    found = static_cast<int>(k);
                    break;
                }
            if (found < 0) {
                keys.emplace_back(s, e);
                fibers.emplace_back();
                totals.push_back(0);
                found = static_cast<int>(keys.size()) - 1;
            }
            fibers[static_cast<std::size_t>(found)].push_back(i);
            totals[static_cast<std::size_t>(found)] += p.atoms()[i].mass;
        }
        return std::tuple(keys, fibers, totals);
    };
    auto [k1, f1, t1] = fiber_map(p1);
    auto [k4, f4, t4] = fiber_map(p4);
    auto find_key = [&](const std::vector<std::pair<Point, Point>>& keys, const Point& s,
                        const Point& e) {
        for (std::size_t k = 0; k < keys.size(); ++k)
            if (approx_point(keys[k].first, s, tol) && approx_point(keys[k].second, e, tol))
                return static_cast<int>(k);
        return -1;
    };
    std::vector<Atom> atoms;
    for (const auto& qa : quad.atoms()) {
        const Point& x = qa.pts[0];
        const Point& y = qa.pts[1];
        const Point& w = qa.pts[3];
        int a = find_key(k1, x, y);
        int b = find_key(k4, y, w);
        if (a < 0 || b < 0)
            throw std::invalid_argument("triple_concat: missing fiber for glued atom");
        for (std::size_t i : f1[static_cast<std::size_t>(a)]) {
            for (std::size_t j : f4[static_cast<std::size_t>(b)]) {
                double m = qa.mass * (p1.atoms()[i].mass / t1[static_cast<std::size_t>(a)]) *
                           (p4.atoms()[j].mass / t4[static_cast<std::size_t>(b)]);
                atoms.push_back({conc_curves(p1.atoms()[i].curve, p4.atoms()[j].curve, tol), m});
            }
        }
    }
    TripleConcatResult out;
    out.middle = p4;
    out.plan = TrafficPlan(std::move(atoms), std::min(p1.snap_tol(), p4.snap_tol()),
                           std::max(p1.domain_radius(), p4.domain_radius()));
    std::string diff = coupling_of(out.plan).first_difference(p0, tol, 1e-12);
    if (!diff.empty())
        throw CertificateError("triple_concat: output coupling differs from p0 (" + diff + ")");
    return out;
}

}  // namespace bransport
