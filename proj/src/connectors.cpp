#include "bransport/connectors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace bransport {

namespace {

constexpr int kMaxDepth = 200;

struct Cube {
    Point lo;
    double side = 0;
};

// Dyadic cell index of p at level k inside the root cube.
std::vector<std::int64_t> cell_of(const Point& p, const Cube& root, int k) {
    double side = root.side / static_cast<double>(std::int64_t(1) << std::min(k, 62));
    std::vector<std::int64_t> idx(p.size());
    std::int64_t cells = std::int64_t(1) << std::min(k, 62);
    for (std::size_t i = 0; i < p.size(); ++i) {
        double t = (p[i] - root.lo[i]) / side;
        idx[i] = std::clamp(static_cast<std::int64_t>(std::floor(t)), std::int64_t(0), cells - 1);
    }
    return idx;
}

Point cell_center(const std::vector<std::int64_t>& idx, const Cube& root, int k) {
    double side = root.side / static_cast<double>(std::int64_t(1) << std::min(k, 62));
    Point c(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i)
        c[i] = root.lo[i] + (static_cast<double>(idx[i]) + 0.5) * side;
    return c;
}

}  // namespace

double connector_constant(double alpha, int d) {
    double expo = static_cast<double>(d) * (1.0 - alpha) - 1.0;
    if (expo >= 0) {
        std::ostringstream os;
        os << "alpha <= 1-1/d: dyadic series ratio 2^(d(1-alpha)-1) = " << std::pow(2.0, expo)
           << " >= 1 diverges";
        throw std::invalid_argument(os.str());
    }
    double q = std::pow(2.0, expo);
    return std::sqrt(static_cast<double>(d)) * (1.0 + 2.0 / (1.0 - q));
}

ConnectorReport irrigate_from_point(const DiscreteMeasure& mu, const Point& x0, double alpha) {
    int d = static_cast<int>(x0.size());
    double C = connector_constant(alpha, d);  // validates supercriticality
    ConnectorReport rep;
    rep.total_mass = mu.total();
    if (mu.empty()) return rep;

    // Bounding cube of supp(mu) and x0.
    Point lo = x0, hi = x0;
    for (const auto& a : mu.atoms())
        for (std::size_t i = 0; i < lo.size(); ++i) {
            lo[i] = std::min(lo[i], a.x[i]);
            hi[i] = std::max(hi[i], a.x[i]);
        }
    double L = 0;
    for (std::size_t i = 0; i < lo.size(); ++i) L = std::max(L, hi[i] - lo[i]);
    rep.cube_side = L;
    double mass_pow = std::pow(rep.total_mass, alpha);
    rep.bound = C * L * mass_pow;

    std::vector<Atom> atoms;
    if (mu.size() == 1) {
        // Single atom: straight segment (or constant curve).
        const auto& a = mu.atoms().front();
        PolyCurve c = approx_point(x0, a.x, 1e-15) ? PolyCurve::constant(a.x)
                                                   : PolyCurve({x0, a.x});
        rep.root_cost = dist(x0, a.x) * std::pow(a.w, alpha);
        rep.tree_cost = rep.root_cost;
        atoms.push_back({c, a.w});
        rep.plan = TrafficPlan(std::move(atoms));
        rep.energy = alpha_energy(rep.plan, alpha);
        if (L > 0 && rep.total_mass > 0) rep.constant_achieved = rep.energy / (L * mass_pow);
        return rep;
    }
    if (L <= 0) {
        // Everything sits at x0.
        rep.plan = TrafficPlan::constant(mu);
        return rep;
    }

    Cube root{lo, L};
    // Depth at which each atom is alone in its dyadic cell.
    std::size_t n = mu.size();
    std::vector<int> depth(n, -1);
    int max_depth = 0;
    for (int k = 0; k <= kMaxDepth; ++k) {
        std::map<std::vector<std::int64_t>, std::vector<std::size_t>> groups;
        bool open = false;
        for (std::size_t i = 0; i < n; ++i) {
            if (depth[i] >= 0) continue;
            groups[cell_of(mu.atoms()[i].x, root, k)].push_back(i);
        }
        for (auto& [idx, members] : groups) {
            if (members.size() == 1)
                depth[members.front()] = k;
            else
                open = true;
        }
        if (!open) break;
        if (k == kMaxDepth)
            throw std::invalid_argument("irrigate_from_point: atoms too close to separate");
    }
    for (std::size_t i = 0; i < n; ++i) max_depth = std::max(max_depth, depth[i]);

    // Curves: x0 -> root center -> descending cell centers -> atom.
    Point c0 = cell_center(std::vector<std::int64_t>(static_cast<std::size_t>(d), 0), root, 0);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<Point> vs{x0, c0};
        for (int k = 1; k <= depth[i]; ++k)
            vs.push_back(cell_center(cell_of(mu.atoms()[i].x, root, k), root, k));
        vs.push_back(mu.atoms()[i].x);
        atoms.push_back({PolyCurve(std::move(vs)), mu.atoms()[i].w});
    }

    // Tree-cost instrumentation: level k collects edges from level-k centers
    // (descents to level k+1 and final legs of atoms alone at level k).
    rep.level_costs.assign(static_cast<std::size_t>(max_depth) + 1, 0.0);
    rep.level_bounds.resize(rep.level_costs.size());
    double q = std::pow(2.0, static_cast<double>(d) * (1.0 - alpha) - 1.0);
    for (std::size_t k = 0; k < rep.level_bounds.size(); ++k)
        rep.level_bounds[k] =
            std::sqrt(static_cast<double>(d)) * L * mass_pow * std::pow(q, static_cast<double>(k));
    rep.root_cost = dist(x0, c0) * mass_pow;
    for (int k = 0; k <= max_depth; ++k) {
        // Mass descending into each level-(k+1) cell.
        std::map<std::vector<std::int64_t>, double> child_mass;
        for (std::size_t i = 0; i < n; ++i)
            if (depth[i] > k) child_mass[cell_of(mu.atoms()[i].x, root, k + 1)] += mu.atoms()[i].w;
        double cost = 0;
        for (const auto& [idx, m] : child_mass) {
            Point child = cell_center(idx, root, k + 1);
            std::vector<std::int64_t> pidx(idx);
            for (auto& v : pidx) v /= 2;
            Point parent = cell_center(pidx, root, k);
            cost += dist(parent, child) * std::pow(m, alpha);
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (depth[i] != k) continue;
            Point ck = cell_center(cell_of(mu.atoms()[i].x, root, k), root, k);
            cost += dist(ck, mu.atoms()[i].x) * std::pow(mu.atoms()[i].w, alpha);
        }
        rep.level_costs[static_cast<std::size_t>(k)] = cost;
    }
    rep.tree_cost = rep.root_cost;
    for (double c : rep.level_costs) rep.tree_cost += c;

    rep.plan = TrafficPlan(std::move(atoms));
    rep.energy = alpha_energy(rep.plan, alpha);
    rep.constant_achieved = rep.energy / (L * mass_pow);
    return rep;
}

ConnectorReport mailing_connector(const Coupling& pi, double alpha) {
    ConnectorReport rep;
    rep.total_mass = pi.total();
    if (pi.empty()) return rep;
    int d = static_cast<int>(pi.atoms().front().src.size());
    double C = connector_constant(alpha, d);

    // Bounding cube of the full support, for the reported bound.
    Point lo = pi.atoms().front().src, hi = lo;
    auto stretch = [&](const Point& p) {
        for (std::size_t i = 0; i < lo.size(); ++i) {
            lo[i] = std::min(lo[i], p[i]);
            hi[i] = std::max(hi[i], p[i]);
        }
    };
    for (const auto& a : pi.atoms()) {
        stretch(a.src);
        stretch(a.dst);
    }
    double L = 0;
    for (std::size_t i = 0; i < lo.size(); ++i) L = std::max(L, hi[i] - lo[i]);
    rep.cube_side = L;
    rep.bound = 2.0 * C * std::pow(rep.total_mass, alpha) * L;

    // Diagonal atoms travel nowhere; only the rest is routed through x0.
    std::vector<CouplingAtom> diag, rest;
    for (const auto& a : pi.atoms())
        (approx_point(a.src, a.dst, 1e-9) ? diag : rest).push_back(a);

    TrafficPlan plan;
    if (!diag.empty()) {
        std::vector<Atom> atoms;
        for (const auto& a : diag) atoms.push_back({PolyCurve::constant(a.src), a.mass});
        plan = TrafficPlan(std::move(atoms));
    }
    if (!rest.empty()) {
        Coupling pr(rest);
        DiscreteMeasure mu_minus = pr.first_marginal();
        DiscreteMeasure mu_plus = pr.second_marginal();
        Point x0 = mu_minus.atoms().front().x;  // lexicographically smallest support point
        ConnectorReport leg1 = irrigate_from_point(mu_minus, x0, alpha);
        ConnectorReport leg2 = irrigate_from_point(mu_plus, x0, alpha);
        TrafficPlan routed = conc_through_delta(leg1.plan.reversed(), leg2.plan, pr);
        plan = plan + routed;
    }
    rep.plan = std::move(plan);
    rep.energy = alpha_energy(rep.plan, alpha);
    if (L > 0 && rep.total_mass > 0)
        rep.constant_achieved = rep.energy / (std::pow(rep.total_mass, alpha) * L);
    return rep;
}

double GridDensity::volume() const {
    double v = 1;
    for (std::size_t i = 0; i < lo.size(); ++i) v *= std::max(0.0, hi[i] - lo[i]);
    return v;
}

namespace {

void require_supercritical(double alpha, int d, bool grid) {
    double expo = 1.0 + alpha * static_cast<double>(d) - static_cast<double>(d);
    if (expo > 0) return;
    std::ostringstream os;
    if (grid)
        os << "ball_cover: covering exponent 1+alpha*d-d = " << expo
           << " <= 0; the covering sum does not shrink with r0";
    else
        os << "ball_cover: alpha <= 1-1/d (exponent 1+alpha*d-d = " << expo << ")";
    throw std::invalid_argument(os.str());
}

}  // namespace

BallCover ball_cover(const DiscreteMeasure& mu, double alpha, double eps) {
    if (!(eps > 0)) throw std::invalid_argument("ball_cover: eps > 0 required");
    BallCover cover;
    cover.eps = eps;
    cover.total_mass = mu.total();
    if (mu.empty()) return cover;
    require_supercritical(alpha, static_cast<int>(mu.atoms().front().x.size()), false);
    for (std::size_t i = 0; i < mu.size(); ++i) {
        const auto& a = mu.atoms()[i];
        double budget = eps / (std::pow(2.0, static_cast<double>(i) + 1.0) *
                               std::max(std::pow(a.w, alpha), 1.0));
        double nearest = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < mu.size(); ++j)
            if (j != i) nearest = std::min(nearest, dist(a.x, mu.atoms()[j].x));
        double r = std::min(budget, nearest / 2.0);
        cover.balls.push_back({a.x, r, a.w});
        cover.certificate += r * std::pow(a.w, alpha);
        cover.covered_mass += a.w;
    }
    return cover;
}

BallCover ball_cover(const GridDensity& mu, double alpha, double eps) {
    if (!(eps > 0)) throw std::invalid_argument("ball_cover: eps > 0 required");
    int d = static_cast<int>(mu.lo.size());
    require_supercritical(alpha, d, true);
    double expo = 1.0 + alpha * static_cast<double>(d) - static_cast<double>(d);
    double leb = mu.volume();
    double fpow = std::pow(mu.density, alpha);
    BallCover cover;
    cover.eps = eps;
    cover.grid_mode = true;
    cover.total_mass = mu.total();
    double r0 = 0.9 * std::pow(eps / ((leb + 1.0) * fpow), 1.0 / expo);
    // Cells of side 2 r0 / sqrt(d) are covered by their circumscribed balls.
    double s = 2.0 * r0 / std::sqrt(static_cast<double>(d));
    std::vector<int> dims(static_cast<std::size_t>(d));
    std::size_t count = 1;
    for (std::size_t i = 0; i < dims.size(); ++i) {
        dims[i] = std::max(1, static_cast<int>(std::ceil((mu.hi[i] - mu.lo[i]) / s)));
        count *= static_cast<std::size_t>(dims[i]);
    }
    // Guard the Remark's budget sum r_i^d <= Leb(X)+1, shrinking r0 if the
    // grid rounding ever overflows it.
    while (static_cast<double>(count) * std::pow(r0, d) > leb + 1.0) {
        r0 *= 0.5;
        s = 2.0 * r0 / std::sqrt(static_cast<double>(d));
        count = 1;
        for (std::size_t i = 0; i < dims.size(); ++i) {
            dims[i] = std::max(1, static_cast<int>(std::ceil((mu.hi[i] - mu.lo[i]) / s)));
            count *= static_cast<std::size_t>(dims[i]);
        }
    }
    cover.r0 = r0;
    cover.balls.reserve(count);
    std::vector<int> idx(static_cast<std::size_t>(d), 0);
    double cellvol = 1;
    for (std::size_t i = 0; i < dims.size(); ++i)
        cellvol *= std::min(s, mu.hi[i] - mu.lo[i]);
    double ball_estimate = mu.density * std::pow(r0, d);  // the Remark's bound f * r^d
    while (true) {
        Point c(static_cast<std::size_t>(d));
        for (std::size_t i = 0; i < c.size(); ++i)
            c[i] = std::min(mu.lo[i] + (idx[i] + 0.5) * s, mu.hi[i]);
        cover.balls.push_back({c, r0, mu.density * cellvol});
        cover.certificate += r0 * std::pow(ball_estimate, alpha);
        std::size_t k = 0;
        while (k < idx.size() && ++idx[k] == dims[k]) idx[k++] = 0;
        if (k == idx.size()) break;
    }
    cover.covered_mass = cover.total_mass;  // the balls tile the box
    return cover;
}

}  // namespace bransport
