#pragma once

#include <array>
#include <vector>

namespace bransport {

// A point of R^d; the dimension is fixed per instance.
using Point = std::vector<double>;

double dot(const Point& a, const Point& b);
double norm(const Point& a);
double dist(const Point& a, const Point& b);
Point add(const Point& a, const Point& b);
Point sub(const Point& a, const Point& b);
Point mul(const Point& a, double s);
Point lerp(const Point& a, const Point& b, double t);
Point origin(int dim);
bool approx_point(const Point& a, const Point& b, double tol);
// Lexicographic order on coordinates.
bool lex_less(const Point& a, const Point& b);

// Distance from p to the segment [a,b] and the clamped projection parameter in [0,1].
double point_segment_param(const Point& p, const Point& a, const Point& b);
double point_segment_dist(const Point& p, const Point& a, const Point& b);

struct SegmentHit {
    enum class Kind { none, point, overlap };
    Kind kind = Kind::none;
    // Normalized parameters on [a1,a2] and [b1,b2]; for overlaps s0<=s1.
    double s0 = 0, s1 = 0;
    double t0 = 0, t1 = 0;
    Point p0, p1;
};

// Intersection of two closed segments in R^d within tolerance `tol`
// (absolute, in length units). Collinear overlaps are reported as such.
SegmentHit intersect_segments(const Point& a1, const Point& a2, const Point& b1,
                              const Point& b2, double tol);

// The set D(c) of points visited at two distinct times, split into its
// isolated points and its one-dimensional part.
struct DoublePointSet {
    std::vector<Point> isolated;
    std::vector<std::array<Point, 2>> segments;
    double length = 0;  // H^1 of the union of the overlap segments
};

// An arc-length parametrized polyline, constant after its stopping time.
// Stored in normal form: consecutive duplicate vertices are dropped, so a
// constant curve has exactly one vertex.
class PolyCurve {
  public:
    PolyCurve() = default;
    explicit PolyCurve(std::vector<Point> vertices, double dup_tol = 1e-12);
    static PolyCurve constant(Point p);

    bool valid() const { return !verts_.empty(); }
    int dim() const;
    const std::vector<Point>& vertices() const { return verts_; }
    const Point& start() const { return verts_.front(); }
    const Point& end() const { return verts_.back(); }
    bool is_constant() const { return verts_.size() == 1; }

    // Total polyline length; the curve is frozen after this time.
    double stopping_time() const;
    // Arc-length position at time t >= 0; equals end() for t >= T.
    Point at(double t) const;
    // Cumulative length up to the k-th vertex.
    double cum_length(std::size_t k) const { return cum_[k]; }

    // Image of [t1,t2] reparametrized to start at time 0 (frozen tails are
    // dropped; the time translation is intentional).
    PolyCurve restricted(double t1, double t2) const;
    PolyCurve reversed() const;

    // No triple t1<t2<t3 with c(t1)=c(t3)!=c(t2); for unit-speed polylines
    // this is injectivity on [0,T].
    bool is_simple(double tol = 1e-9) const;
    DoublePointSet double_points(double tol = 1e-9) const;

    bool approx_equal(const PolyCurve& other, double tol) const;
    bool operator==(const PolyCurve& other) const { return verts_ == other.verts_; }
    bool lex_before(const PolyCurve& other) const;

  private:
    std::vector<Point> verts_;
    std::vector<double> cum_;
};

// Spec operation names.
inline double stopping_time(const PolyCurve& c) { return c.stopping_time(); }
inline Point evaluate(const PolyCurve& c, double t) { return c.at(t); }

}  // namespace bransport
