#pragma once

// Shared generators and test-side oracles. The oracles here are intentionally
// independent of the library code paths they check.

#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <vector>

#include "bransport/measure.hpp"
#include "bransport/traffic_plan.hpp"

namespace testsupport {

using bransport::Atom;
using bransport::Coupling;
using bransport::CouplingAtom;
using bransport::DiscreteMeasure;
using bransport::Point;
using bransport::PolyCurve;
using bransport::TrafficPlan;
using bransport::WeightedPoint;

inline double rand_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double rand_range(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * rand_unit(rng);
}

inline Point rand_point(std::mt19937_64& rng, int d, double radius) {
    while (true) {
        Point p(static_cast<std::size_t>(d));
        for (auto& c : p) c = rand_range(rng, -radius, radius);
        if (bransport::norm(p) <= radius) return p;
    }
}

// Random polyline with well-separated waypoints.
inline PolyCurve rand_curve(std::mt19937_64& rng, int d, double radius, int min_v = 2,
                            int max_v = 5) {
    int nv = min_v + static_cast<int>(rng() % static_cast<std::uint64_t>(max_v - min_v + 1));
    while (true) {
        std::vector<Point> vs;
        for (int i = 0; i < nv; ++i) vs.push_back(rand_point(rng, d, radius));
        bool ok = true;
        for (std::size_t i = 0; i + 1 < vs.size(); ++i)
            if (bransport::dist(vs[i], vs[i + 1]) < 0.05) ok = false;
        if (ok) return PolyCurve(vs);
    }
}

// Insert an out-and-back excursion so the curve retraces a positive-length
// piece.
inline PolyCurve with_retrace(std::mt19937_64& rng, const PolyCurve& c) {
    const auto& vs = c.vertices();
    std::size_t k = vs.size() < 2 ? 0 : rng() % (vs.size() - 1);
    std::vector<Point> out;
    for (std::size_t i = 0; i <= k; ++i) out.push_back(vs[i]);
    Point mid = bransport::lerp(vs[k], vs[k + 1], 0.6);
    out.push_back(mid);
    out.push_back(vs[k]);  // back
    out.push_back(mid);    // and forth again
    for (std::size_t i = k + 1; i < vs.size(); ++i) out.push_back(vs[i]);
    return PolyCurve(out);
}

inline TrafficPlan rand_plan(std::mt19937_64& rng, int d, double radius, int max_atoms = 4,
                             bool retrace = false) {
    int na = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(max_atoms));
    std::vector<Atom> atoms;
    for (int i = 0; i < na; ++i) {
        PolyCurve c = rand_curve(rng, d, radius);
        if (retrace && i == 0) c = with_retrace(rng, c);
        atoms.push_back({c, rand_range(rng, 0.1, 1.0)});
    }
    return TrafficPlan(std::move(atoms));
}

// Random coupling with the given atomic marginals: greedy transport fill in a
// shuffled order, exact marginals by construction.
inline Coupling rand_coupling_with_marginals(std::mt19937_64& rng, const DiscreteMeasure& mu,
                                             const DiscreteMeasure& nu) {
    std::vector<double> row(mu.size()), col(nu.size());
    for (std::size_t i = 0; i < mu.size(); ++i) row[i] = mu.atoms()[i].w;
    for (std::size_t j = 0; j < nu.size(); ++j) col[j] = nu.atoms()[j].w;
    std::vector<std::pair<std::size_t, std::size_t>> cells;
    for (std::size_t i = 0; i < row.size(); ++i)
        for (std::size_t j = 0; j < col.size(); ++j) cells.emplace_back(i, j);
    for (std::size_t i = cells.size(); i > 1; --i)
        std::swap(cells[i - 1], cells[rng() % i]);
    std::vector<CouplingAtom> atoms;
    for (auto [i, j] : cells) {
        double m = std::min(row[i], col[j]);
        if (m <= 1e-15) continue;
        // Leave some mass behind at random so fibers stay rich.
        if (rand_unit(rng) < 0.5) m *= rand_range(rng, 0.3, 1.0);
        row[i] -= m;
        col[j] -= m;
        atoms.push_back({mu.atoms()[i].x, nu.atoms()[j].x, m});
    }
    // Northwest-style cleanup of the remainders keeps the marginals exact.
    std::size_t i = 0, j = 0;
    while (i < row.size() && j < col.size()) {
        if (row[i] <= 1e-15) {
            ++i;
            continue;
        }
        if (col[j] <= 1e-15) {
            ++j;
            continue;
        }
        double m = std::min(row[i], col[j]);
        row[i] -= m;
        col[j] -= m;
        atoms.push_back({mu.atoms()[i].x, nu.atoms()[j].x, m});
    }
    return Coupling(std::move(atoms));
}

inline DiscreteMeasure rand_measure(std::mt19937_64& rng, int d, double radius, int max_atoms,
                                    double total = 1.0) {
    int na = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(max_atoms));
    std::vector<WeightedPoint> atoms;
    double sum = 0;
    for (int i = 0; i < na; ++i) {
        double w = rand_range(rng, 0.2, 1.0);
        atoms.push_back({rand_point(rng, d, radius), w});
        sum += w;
    }
    for (auto& a : atoms) a.w *= total / sum;
    return DiscreteMeasure(std::move(atoms));
}

// Golden-section minimizer of a unimodal function on [a,b].
inline double golden_section(const std::function<double(double)>& f, double a, double b,
                             int iters = 200) {
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - g * (b - a), x2 = a + g * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int i = 0; i < iters; ++i) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        }
    }
    return 0.5 * (a + b);
}

// Grid-counting estimate of H^1 of the 1-dimensional part of D(curve):
// for each line carrying at least two collinear sub-segments, mark fine grid
// cells covered by two or more of them. Independent of the interval-merging
// arithmetic inside the library.
inline double double_length_oracle(const PolyCurve& c, double h = 1e-4) {
    const auto& vs = c.vertices();
    double total = 0;
    std::vector<char> used(vs.size(), 0);
    for (std::size_t i = 0; i + 1 < vs.size(); ++i) {
        if (used[i]) continue;
        Point dir = bransport::sub(vs[i + 1], vs[i]);
        double dl = bransport::norm(dir);
        if (dl == 0) continue;
        // Collect all segments collinear with segment i (including itself).
        std::vector<std::pair<double, double>> intervals;  // param range on the line
        auto on_line = [&](const Point& p) {
            Point w = bransport::sub(p, vs[i]);
            double t = bransport::dot(w, dir) / (dl * dl);
            Point foot = bransport::add(vs[i], bransport::mul(dir, t));
            return std::pair(bransport::dist(p, foot) < 1e-9, t * dl);
        };
        for (std::size_t j = i; j + 1 < vs.size(); ++j) {
            auto [ok1, t1] = on_line(vs[j]);
            auto [ok2, t2] = on_line(vs[j + 1]);
            if (ok1 && ok2) {
                intervals.emplace_back(std::min(t1, t2), std::max(t1, t2));
                if (j > i) used[j] = 1;
            }
        }
        if (intervals.size() < 2) continue;
        double lo = intervals[0].first, hi = intervals[0].second;
        for (auto& [a, b] : intervals) {
            lo = std::min(lo, a);
            hi = std::max(hi, b);
        }
        int cells = static_cast<int>(std::ceil((hi - lo) / h));
        for (int k = 0; k < cells; ++k) {
            double mid = lo + (k + 0.5) * h;
            int covered = 0;
            for (auto& [a, b] : intervals)
                if (mid >= a && mid <= b) ++covered;
            if (covered >= 2) total += h;
        }
    }
    return total;
}

}  // namespace testsupport
