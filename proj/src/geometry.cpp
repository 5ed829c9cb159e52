#include "bransport/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bransport {

double dot(const Point& a, const Point& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm(const Point& a) { return std::sqrt(dot(a, a)); }

double dist(const Point& a, const Point& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

Point add(const Point& a, const Point& b) {
    Point r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

Point sub(const Point& a, const Point& b) {
    Point r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

Point mul(const Point& a, double s) {
    Point r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] * s;
    return r;
}

Point lerp(const Point& a, const Point& b, double t) {
    Point r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + t * (b[i] - a[i]);
    return r;
}

Point origin(int dim) { return Point(static_cast<std::size_t>(dim), 0.0); }

bool approx_point(const Point& a, const Point& b, double tol) {
    if (a.size() != b.size()) return false;
    return dist(a, b) <= tol;
}

bool lex_less(const Point& a, const Point& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

double point_segment_param(const Point& p, const Point& a, const Point& b) {
    Point u = sub(b, a);
    double uu = dot(u, u);
    if (uu == 0) return 0;
    double t = dot(sub(p, a), u) / uu;
    return std::clamp(t, 0.0, 1.0);
}

double point_segment_dist(const Point& p, const Point& a, const Point& b) {
    double t = point_segment_param(p, a, b);
    return dist(p, lerp(a, b, t));
}

SegmentHit intersect_segments(const Point& a1, const Point& a2, const Point& b1,
                              const Point& b2, double tol) {
    SegmentHit res;
    Point u = sub(a2, a1), v = sub(b2, b1), w = sub(b1, a1);
    double uu = dot(u, u), vv = dot(v, v), uv = dot(u, v);
    double ulen = std::sqrt(uu), vlen = std::sqrt(vv);

    // Degenerate operands reduce to point-on-segment tests.
    if (ulen <= tol && vlen <= tol) {
        if (dist(a1, b1) <= tol) {
            res.kind = SegmentHit::Kind::point;
            res.p0 = a1;
        }
        return res;
    }
    if (ulen <= tol) {
        if (point_segment_dist(a1, b1, b2) <= tol) {
            res.kind = SegmentHit::Kind::point;
            res.t0 = point_segment_param(a1, b1, b2);
            res.p0 = a1;
        }
        return res;
    }
    if (vlen <= tol) {
        if (point_segment_dist(b1, a1, a2) <= tol) {
            res.kind = SegmentHit::Kind::point;
            res.s0 = point_segment_param(b1, a1, a2);
            res.p0 = b1;
        }
        return res;
    }

    double denom = uu * vv - uv * uv;
    if (denom <= 1e-14 * uu * vv) {
        // Parallel lines: either collinear or disjoint.
        double off = point_segment_dist(b1, a1, a2);
        double off2 = point_segment_dist(b2, a1, a2);
        Point foot1 = lerp(a1, a2, point_segment_param(b1, a1, a2));
        (void)foot1;
        if (off > tol && off2 > tol) return res;
        // Collinear within tolerance: project b-endpoints on the a-axis.
        double sb1 = dot(sub(b1, a1), u) / uu;
        double sb2 = dot(sub(b2, a1), u) / uu;
        double lo = std::min(sb1, sb2), hi = std::max(sb1, sb2);
        double s0 = std::max(0.0, lo), s1 = std::min(1.0, hi);
        double tolp = tol / ulen;
        if (s1 < -tolp || s0 > 1 + tolp || s1 - s0 < -tolp) return res;
        Point q0 = lerp(a1, a2, s0), q1 = lerp(a1, a2, s1);
        // Verify the clamped overlap really lies on both segments.
        if (point_segment_dist(q0, b1, b2) > tol || point_segment_dist(q1, b1, b2) > tol)
            return res;
        if ((s1 - s0) * ulen <= tol) {
            res.kind = SegmentHit::Kind::point;
            res.s0 = std::clamp(0.5 * (s0 + s1), 0.0, 1.0);
            res.p0 = lerp(a1, a2, res.s0);
            res.t0 = point_segment_param(res.p0, b1, b2);
            return res;
        }
        res.kind = SegmentHit::Kind::overlap;
        res.s0 = s0;
        res.s1 = s1;
        res.p0 = q0;
        res.p1 = q1;
        res.t0 = point_segment_param(q0, b1, b2);
        res.t1 = point_segment_param(q1, b1, b2);
        return res;
    }

    double uw = dot(u, w), vw = dot(v, w);
    double s = (uw * vv - vw * uv) / denom;
    double t = (uw * uv - vw * uu) / denom;
    double stol = tol / ulen, ttol = tol / vlen;
    if (s < -stol || s > 1 + stol || t < -ttol || t > 1 + ttol) return res;
    s = std::clamp(s, 0.0, 1.0);
    t = std::clamp(t, 0.0, 1.0);
    Point pa = lerp(a1, a2, s), pb = lerp(b1, b2, t);
    if (dist(pa, pb) > tol) return res;
    res.kind = SegmentHit::Kind::point;
    res.s0 = s;
    res.t0 = t;
    res.p0 = lerp(pa, pb, 0.5);
    return res;
}

PolyCurve::PolyCurve(std::vector<Point> vertices, double dup_tol) {
    if (vertices.empty()) throw std::invalid_argument("PolyCurve needs at least one vertex");
    std::size_t d = vertices.front().size();
    verts_.reserve(vertices.size());
    for (auto& v : vertices) {
        if (v.size() != d) throw std::invalid_argument("PolyCurve: mixed dimensions");
        for (double c : v)
            if (!std::isfinite(c)) throw std::invalid_argument("PolyCurve: non-finite coordinate");
        if (verts_.empty() || dist(verts_.back(), v) > dup_tol) verts_.push_back(std::move(v));
    }
    cum_.resize(verts_.size());
    cum_[0] = 0;
    for (std::size_t i = 1; i < verts_.size(); ++i)
        cum_[i] = cum_[i - 1] + dist(verts_[i - 1], verts_[i]);
}

PolyCurve PolyCurve::constant(Point p) { return PolyCurve({std::move(p)}); }

int PolyCurve::dim() const { return static_cast<int>(verts_.front().size()); }

double PolyCurve::stopping_time() const { return cum_.back(); }

Point PolyCurve::at(double t) const {
    if (t < 0) throw std::invalid_argument("PolyCurve::at: negative time");
    if (t >= cum_.back()) return verts_.back();
    auto it = std::upper_bound(cum_.begin(), cum_.end(), t);
    std::size_t k = static_cast<std::size_t>(it - cum_.begin());  // cum_[k-1] <= t < cum_[k]
    double seg = cum_[k] - cum_[k - 1];
    double local = (t - cum_[k - 1]) / seg;
    return lerp(verts_[k - 1], verts_[k], local);
}

PolyCurve PolyCurve::restricted(double t1, double t2) const {
    if (t1 < 0 || t1 > t2) throw std::invalid_argument("PolyCurve::restricted: bad interval");
    double T = stopping_time();
    double a = std::min(t1, T), b = std::min(t2, T);
    std::vector<Point> vs;
    vs.push_back(at(a));
    for (std::size_t i = 0; i < verts_.size(); ++i)
        if (cum_[i] > a && cum_[i] < b) vs.push_back(verts_[i]);
    if (b > a) vs.push_back(at(b));
    return PolyCurve(std::move(vs), 1e-12);
}

PolyCurve PolyCurve::reversed() const {
    std::vector<Point> vs(verts_.rbegin(), verts_.rend());
    return PolyCurve(std::move(vs));
}

DoublePointSet PolyCurve::double_points(double tol) const {
    DoublePointSet out;
    std::size_t n = verts_.size();
    if (n < 2) return out;
    std::vector<std::array<Point, 2>> overlaps;
    std::vector<Point> pts;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        for (std::size_t j = i + 1; j + 1 < n; ++j) {
            SegmentHit h = intersect_segments(verts_[i], verts_[i + 1], verts_[j], verts_[j + 1], tol);
            if (h.kind == SegmentHit::Kind::none) continue;
            if (h.kind == SegmentHit::Kind::overlap) {
                overlaps.push_back({h.p0, h.p1});
                continue;
            }
            // A shared vertex of adjacent segments is a single visit, not a
            // double point.
            if (j == i + 1 && h.s0 > 1 - tol / std::max(cum_[i + 1] - cum_[i], tol) &&
                h.t0 < tol / std::max(cum_[j + 1] - cum_[j], tol))
                continue;
            pts.push_back(h.p0);
        }
    }
    // Merge collinear overlapping pieces so the recorded length is the H^1
    // measure of the union.
    bool merged = true;
    while (merged) {
        merged = false;
        for (std::size_t i = 0; i < overlaps.size() && !merged; ++i) {
            for (std::size_t j = i + 1; j < overlaps.size() && !merged; ++j) {
                const auto& A = overlaps[i];
                const auto& B = overlaps[j];
                if (point_segment_dist(B[0], A[0], A[1]) > tol &&
                    point_segment_dist(B[1], A[0], A[1]) > tol)
                    continue;
                SegmentHit h = intersect_segments(A[0], A[1], B[0], B[1], tol);
                if (h.kind == SegmentHit::Kind::none) continue;
                // Hull of the four endpoints along the common line.
                Point dir = sub(A[1], A[0]);
                double dl = norm(dir);
                if (dl == 0) continue;
                std::vector<Point> cand{A[0], A[1], B[0], B[1]};
                double lo = 0, hi = 0;
                std::size_t ilo = 0, ihi = 0;
                for (std::size_t k = 0; k < cand.size(); ++k) {
                    double s = dot(sub(cand[k], A[0]), dir) / (dl * dl);
                    if (s < lo) { lo = s; ilo = k; }
                    if (s > hi) { hi = s; ihi = k; }
                }
                std::array<Point, 2> hull{cand[ilo], cand[ihi]};
                overlaps[i] = hull;
                overlaps.erase(overlaps.begin() + static_cast<long>(j));
                merged = true;
            }
        }
    }
    double len = 0;
    for (const auto& s : overlaps) len += dist(s[0], s[1]);
    // Keep isolated points unless they sit strictly inside an overlap.
    for (const auto& p : pts) {
        bool interior = false;
        bool dup = false;
        for (const auto& s : overlaps) {
            if (point_segment_dist(p, s[0], s[1]) <= tol) {
                double seglen = dist(s[0], s[1]);
                double t = point_segment_param(p, s[0], s[1]);
                if (t * seglen > tol && (1 - t) * seglen > tol) interior = true;
            }
        }
        for (const auto& q : out.isolated)
            if (dist(p, q) <= tol) dup = true;
        if (!interior && !dup) out.isolated.push_back(p);
    }
    out.segments = std::move(overlaps);
    out.length = len;
    return out;
}

bool PolyCurve::is_simple(double tol) const {
    DoublePointSet d = double_points(tol);
    return d.isolated.empty() && d.segments.empty();
}

bool PolyCurve::approx_equal(const PolyCurve& other, double tol) const {
    if (verts_.size() != other.verts_.size()) return false;
    for (std::size_t i = 0; i < verts_.size(); ++i)
        if (dist(verts_[i], other.verts_[i]) > tol) return false;
    return true;
}

bool PolyCurve::lex_before(const PolyCurve& other) const {
    return std::lexicographical_compare(
        verts_.begin(), verts_.end(), other.verts_.begin(), other.verts_.end(),
        [](const Point& a, const Point& b) { return lex_less(a, b); });
}

}  // namespace bransport
