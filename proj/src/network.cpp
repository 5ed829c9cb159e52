#include "bransport/network.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bransport {

Network::Network(double snap_tol, double domain_radius)
    : tol_(snap_tol), radius_(domain_radius) {}

int Network::snap_point(const Point& p) {
    int found = find_point(p);
    if (found >= 0) return found;
    if (radius_ > 0 && norm(p) > radius_ + tol_)
        throw std::invalid_argument("Network: point outside the domain ball");
    verts_.push_back(p);
    adj_.emplace_back();
    int v = static_cast<int>(verts_.size()) - 1;
    return v;
}

int Network::find_point(const Point& p) const {
    for (std::size_t i = 0; i < verts_.size(); ++i)
        if (approx_point(verts_[i], p, tol_)) return static_cast<int>(i);
    return -1;
}

int Network::opposite(int edge, int v) const {
    const Edge& e = edges_[static_cast<std::size_t>(edge)];
    return e.a == v ? e.b : e.a;
}

double Network::total_length() const {
    double s = 0;
    for (const Edge& e : edges_)
        if (e.alive) s += e.len;
    return s;
}

int Network::alive_edge_count() const {
    int n = 0;
    for (const Edge& e : edges_)
        if (e.alive) ++n;
    return n;
}

int Network::create_edge(int a, int b) {
    if (a == b) return -1;
    auto key = std::minmax(a, b);
    auto it = edge_by_verts_.find(key);
    if (it != edge_by_verts_.end()) return it->second;
    Edge e;
    e.a = a;
    e.b = b;
    e.len = dist(verts_[static_cast<std::size_t>(a)], verts_[static_cast<std::size_t>(b)]);
    e.alive = true;
    if (e.len <= tol_) return -1;  // no zero-length edges
    edges_.push_back(e);
    int id = static_cast<int>(edges_.size()) - 1;
    adj_[static_cast<std::size_t>(a)].push_back(id);
    adj_[static_cast<std::size_t>(b)].push_back(id);
    edge_by_verts_[key] = id;
    return id;
}

void Network::kill_edge(int e) {
    Edge& ed = edges_[static_cast<std::size_t>(e)];
    if (!ed.alive) return;
    ed.alive = false;
    edge_by_verts_.erase(std::minmax(ed.a, ed.b));
    auto scrub = [&](int v) {
        auto& lst = adj_[static_cast<std::size_t>(v)];
        lst.erase(std::remove(lst.begin(), lst.end(), e), lst.end());
    };
    scrub(ed.a);
    scrub(ed.b);
}

void Network::split_edge_at(int e, const std::vector<int>& vs) {
    const Edge ed = edges_[static_cast<std::size_t>(e)];
    const Point& pa = verts_[static_cast<std::size_t>(ed.a)];
    const Point& pb = verts_[static_cast<std::size_t>(ed.b)];
    // Keep interior split vertices only, ordered along the edge.
    std::vector<std::pair<double, int>> cuts;
    for (int v : vs) {
        if (v == ed.a || v == ed.b) continue;
        double t = point_segment_param(verts_[static_cast<std::size_t>(v)], pa, pb);
        if (t * ed.len <= tol_ || (1 - t) * ed.len <= tol_) continue;
        cuts.emplace_back(t, v);
    }
    if (cuts.empty()) return;
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end(),
                           [](auto& x, auto& y) { return x.second == y.second; }),
               cuts.end());
    kill_edge(e);
    int prev = ed.a;
    for (auto& [t, v] : cuts) {
        create_edge(prev, v);
        prev = v;
    }
    create_edge(prev, ed.b);
}

void Network::integrate_vertex(int v) {
    // Split any alive edge containing v in its interior.
    const Point& p = verts_[static_cast<std::size_t>(v)];
    std::vector<int> hits;
    for (std::size_t e = 0; e < edges_.size(); ++e) {
        const Edge& ed = edges_[e];
        if (!ed.alive || ed.a == v || ed.b == v) continue;
        const Point& pa = verts_[static_cast<std::size_t>(ed.a)];
        const Point& pb = verts_[static_cast<std::size_t>(ed.b)];
        if (point_segment_dist(p, pa, pb) <= tol_) hits.push_back(static_cast<int>(e));
    }
    for (int e : hits) split_edge_at(e, {v});
}

void Network::add_segment(int a, int b) {
    if (a == b) return;
    const Point pa = verts_[static_cast<std::size_t>(a)];
    const Point pb = verts_[static_cast<std::size_t>(b)];
    double seglen = dist(pa, pb);
    if (seglen <= tol_) return;

    // (param on [pa,pb], vertex id) split points of the new segment.
    std::vector<std::pair<double, int>> cuts;
    // Existing vertices lying on the open segment.
    for (std::size_t v = 0; v < verts_.size(); ++v) {
        int vi = static_cast<int>(v);
        if (vi == a || vi == b) continue;
        if (point_segment_dist(verts_[v], pa, pb) > tol_) continue;
        double t = point_segment_param(verts_[v], pa, pb);
        if (t * seglen <= tol_ || (1 - t) * seglen <= tol_) continue;
        cuts.emplace_back(t, vi);
    }
    // Crossings and overlaps with alive edges. New vertices created here may
    // require splitting those edges; defer the splits until the scan is done.
    std::vector<std::pair<int, std::vector<int>>> edge_cuts;
    std::size_t n_edges_before = edges_.size();
    for (std::size_t e = 0; e < n_edges_before; ++e) {
        const Edge ed = edges_[e];
        if (!ed.alive) continue;
        const Point qa = verts_[static_cast<std::size_t>(ed.a)];
        const Point qb = verts_[static_cast<std::size_t>(ed.b)];
        SegmentHit h = intersect_segments(pa, pb, qa, qb, tol_);
        if (h.kind == SegmentHit::Kind::none) continue;
        std::vector<int> splits_here;
        auto handle_point = [&](const Point& hp, double s) {
            double te = point_segment_param(hp, qa, qb);
            bool e_interior = te * ed.len > tol_ && (1 - te) * ed.len > tol_;
            int v = snap_point(hp);
            if (e_interior) splits_here.push_back(v);
            if (s * seglen > tol_ && (1 - s) * seglen > tol_) cuts.emplace_back(s, v);
        };
        if (h.kind == SegmentHit::Kind::point) {
            handle_point(h.p0, h.s0);
        } else {
            handle_point(h.p0, h.s0);
            handle_point(h.p1, h.s1);
        }
        if (!splits_here.empty()) edge_cuts.emplace_back(static_cast<int>(e), splits_here);
    }
    for (auto& [e, vs] : edge_cuts) split_edge_at(e, vs);

    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end(),
                           [](auto& x, auto& y) { return x.second == y.second; }),
               cuts.end());
    int prev = a;
    for (auto& [t, v] : cuts) {
        if (v != prev) create_edge(prev, v);
        prev = v;
    }
    if (prev != b) create_edge(prev, b);
}

void Network::add_curve(const PolyCurve& c) {
    std::vector<int> ids;
    ids.reserve(c.vertices().size());
    for (const Point& p : c.vertices()) {
        if (radius_ > 0 && norm(p) > radius_ + tol_)
            throw std::invalid_argument("Network: curve leaves the domain ball");
        int v = snap_point(p);
        integrate_vertex(v);
        ids.push_back(v);
    }
    for (std::size_t i = 0; i + 1 < ids.size(); ++i) add_segment(ids[i], ids[i + 1]);
}

std::vector<EdgeStep> Network::path_of(const PolyCurve& c) const {
    std::vector<EdgeStep> path;
    std::vector<int> ids;
    for (const Point& p : c.vertices()) {
        int v = find_point(p);
        if (v < 0) throw std::invalid_argument("Network::path_of: curve not registered");
        ids.push_back(v);
    }
    for (std::size_t i = 0; i + 1 < ids.size(); ++i) {
        int cur = ids[i], target = ids[i + 1];
        if (cur == target) continue;
        const Point& P = verts_[static_cast<std::size_t>(ids[i])];
        const Point& Q = verts_[static_cast<std::size_t>(target)];
        double seglen = dist(P, Q);
        double progress = 0;
        int guard = static_cast<int>(edges_.size()) + 2;
        while (cur != target) {
            if (--guard < 0) throw std::invalid_argument("Network::path_of: walk failed");
            int best_edge = -1, best_next = -1;
            double best_t = 2.0;
            for (int e : adj_[static_cast<std::size_t>(cur)]) {
                const Edge& ed = edges_[static_cast<std::size_t>(e)];
                if (!ed.alive) continue;
                int other = ed.a == cur ? ed.b : ed.a;
                const Point& po = verts_[static_cast<std::size_t>(other)];
                if (point_segment_dist(po, P, Q) > tol_) continue;
                double t = point_segment_param(po, P, Q);
                if (t * seglen <= progress + tol_) continue;
                if (t < best_t) {
                    best_t = t;
                    best_edge = e;
                    best_next = other;
                }
            }
            if (best_edge < 0)
                throw std::invalid_argument("Network::path_of: segment not covered by edges");
            path.push_back({best_edge, edges_[static_cast<std::size_t>(best_edge)].a == cur});
            progress = best_t * seglen;
            cur = best_next;
        }
    }
    return path;
}

std::vector<EdgeStep> Network::register_curve(const PolyCurve& c) {
    add_curve(c);
    return path_of(c);
}

Network::Location Network::locate(const Point& p) const {
    Location loc;
    int v = find_point(p);
    if (v >= 0) {
        loc.kind = Location::Kind::vertex;
        loc.index = v;
        return loc;
    }
    for (std::size_t e = 0; e < edges_.size(); ++e) {
        const Edge& ed = edges_[e];
        if (!ed.alive) continue;
        const Point& pa = verts_[static_cast<std::size_t>(ed.a)];
        const Point& pb = verts_[static_cast<std::size_t>(ed.b)];
        if (point_segment_dist(p, pa, pb) <= tol_) {
            loc.kind = Location::Kind::edge_interior;
            loc.index = static_cast<int>(e);
            loc.param = point_segment_param(p, pa, pb);
            return loc;
        }
    }
    return loc;
}

}  // namespace bransport
