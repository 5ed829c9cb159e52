#pragma once

#include <map>
#include <utility>
#include <vector>

#include "bransport/geometry.hpp"

namespace bransport {

// One directed traversal of an undirected network edge.
struct EdgeStep {
    int edge = -1;
    bool forward = true;
    bool operator==(const EdgeStep&) const = default;
};

// Embedded graph shared by the curves of a plan. Segments meet only at
// shared vertices: inserting a curve splits existing edges at crossings and
// merges collinear overlaps into shared subedges. Single-writer during
// construction, immutable afterwards; queries are read-only.
class Network {
  public:
    explicit Network(double snap_tol = 1e-9, double domain_radius = 0.0);

    struct Edge {
        int a = -1, b = -1;
        double len = 0;
        bool alive = false;
    };

    // Find-or-add a vertex within snap tolerance.
    int snap_point(const Point& p);
    // Find only; -1 if absent.
    int find_point(const Point& p) const;

    // Insert the curve's segments into the arrangement.
    void add_curve(const PolyCurve& c);
    // Resolve the contiguous edge sequence traversed by an added curve.
    std::vector<EdgeStep> path_of(const PolyCurve& c) const;
    // add_curve + path_of; idempotent on already-registered curves.
    std::vector<EdgeStep> register_curve(const PolyCurve& c);

    int vertex_count() const { return static_cast<int>(verts_.size()); }
    const Point& vertex(int v) const { return verts_[static_cast<std::size_t>(v)]; }
    const std::vector<Edge>& edges() const { return edges_; }
    const std::vector<int>& edges_at(int v) const { return adj_[static_cast<std::size_t>(v)]; }
    int opposite(int edge, int v) const;
    double total_length() const;
    int alive_edge_count() const;

    struct Location {
        enum class Kind { none, vertex, edge_interior };
        Kind kind = Kind::none;
        int index = -1;
        double param = 0;
    };
    Location locate(const Point& p) const;

    double snap_tol() const { return tol_; }
    double domain_radius() const { return radius_; }

  private:
    void add_segment(int a, int b);
    // Split edge e at vertex v (assumed interior); children inherit nothing.
    void split_edge_at(int e, const std::vector<int>& vs);
    int create_edge(int a, int b);
    void kill_edge(int e);
    void integrate_vertex(int v);

    double tol_;
    double radius_;
    std::vector<Point> verts_;
    std::vector<Edge> edges_;
    std::vector<std::vector<int>> adj_;
    std::map<std::pair<int, int>, int> edge_by_verts_;
};

}  // namespace bransport
