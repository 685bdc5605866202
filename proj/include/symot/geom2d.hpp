// Exact 2-d geometric kernel: convex polygon clipping against half-planes
// and closed-form moment integrals of linear densities over polygons.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace symot {

// Degeneracy threshold, in domain units. Domains are expected to be
// normalized to roughly unit diameter before tolerances matter.
inline constexpr double kEpsGeom = 1e-12;

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator/(double s) const { return {x / s, y / s}; }
    Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
    bool operator==(const Vec2& o) const { return x == o.x && y == o.y; }

    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double cross(const Vec2& o) const { return x * o.y - y * o.x; }
    double norm2() const { return x * x + y * y; }
    double norm() const { return std::sqrt(norm2()); }
    bool finite() const { return std::isfinite(x) && std::isfinite(y); }
};

using Point2 = Vec2;

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

inline double dist2(const Point2& a, const Point2& b) { return (a - b).norm2(); }
inline double dist(const Point2& a, const Point2& b) { return (a - b).norm(); }

/// Density value rho(p) = grad . p + offset, nonnegative on its domain.
struct LinearDensity {
    Vec2 grad{0.0, 0.0};
    double offset = 1.0;

    double operator()(const Point2& p) const { return grad.dot(p) + offset; }

    static LinearDensity constant(double c) { return {{0.0, 0.0}, c}; }
};

// Closed half-plane { p : normal . p <= offset }.
struct HalfPlane {
    Vec2 normal;
    double offset = 0.0;

    HalfPlane() = default;
    HalfPlane(const Vec2& n, double c) : normal(n), offset(c) {
        if (!(normal.norm2() > 0.0)) throw Error("HalfPlane: zero normal");
    }

    double signed_distance(const Point2& p) const {
        return (normal.dot(p) - offset) / normal.norm();
    }

    // Power bisector: points x with |x-xi|^2 - wi <= |x-xj|^2 - wj.
    static HalfPlane power_bisector(const Point2& xi, double wi,
                                    const Point2& xj, double wj) {
        Vec2 n = xj - xi;
        const double len = n.norm();
        if (!(len > 0.0)) throw Error("power_bisector: coincident sites");
        // normalized so offset and signed distances are in length units
        double c = (xj.norm2() - xi.norm2() + wi - wj) / (2.0 * len);
        return HalfPlane{n / len, c};
    }
};

// Identifier of the supporting line of a polygon edge. Nonnegative values
// are bisectors toward the given site index; negative values encode mesh
// edges as ~edge_index; kNoLine marks edges of untagged polygons.
using LineRef = std::int64_t;
inline constexpr LineRef kNoLine = std::numeric_limits<std::int64_t>::min();

inline LineRef line_of_bisector(int site) { return site; }
inline LineRef line_of_mesh_edge(int edge) { return ~static_cast<LineRef>(edge); }
inline bool is_bisector_line(LineRef l) { return l >= 0; }
inline bool is_mesh_edge_line(LineRef l) { return l < 0 && l != kNoLine; }
inline int bisector_site(LineRef l) { return static_cast<int>(l); }
inline int mesh_edge_index(LineRef l) { return static_cast<int>(~l); }

/// Counter-clockwise convex polygon. Each vertex carries the id of the
/// line supporting the edge that starts at it, so a vertex's provenance is
/// the pair (previous edge line, own edge line).
struct ConvexPolygon {
    struct Vertex {
        Point2 p;
        LineRef line = kNoLine;
    };

    std::vector<Vertex> v;

    bool empty() const { return v.empty(); }
    std::size_t size() const { return v.size(); }

    double area() const {
        double a = 0.0;
        for (std::size_t i = 0, n = v.size(); i < n; ++i) {
            const Point2& p = v[i].p;
            const Point2& q = v[(i + 1) % n].p;
            a += p.cross(q);
        }
        return 0.5 * a;
    }

    static ConvexPolygon triangle(const Point2& a, const Point2& b, const Point2& c,
                                  LineRef ab = kNoLine, LineRef bc = kNoLine,
                                  LineRef ca = kNoLine) {
        ConvexPolygon poly;
        poly.v = {{a, ab}, {b, bc}, {c, ca}};
        return poly;
    }

    static ConvexPolygon from_points(const std::vector<Point2>& pts) {
        ConvexPolygon poly;
        poly.v.reserve(pts.size());
        for (const Point2& p : pts) poly.v.push_back({p, kNoLine});
        return poly;
    }
};

/// Clips poly against h. Vertices exactly on the boundary (within kEpsGeom)
/// count as inside, which keeps clipping idempotent. New vertices are tagged
/// with clip_line so their generating bisector stays known.
inline ConvexPolygon clip_polygon_halfplane(const ConvexPolygon& poly, const HalfPlane& h,
                                            LineRef clip_line = kNoLine) {
    const std::size_t n = poly.v.size();
    if (n == 0) return {};

    const double inv_norm = 1.0 / h.normal.norm();
    std::vector<double> sd(n);
    bool all_in = true, all_out = true;
    for (std::size_t i = 0; i < n; ++i) {
        sd[i] = (h.normal.dot(poly.v[i].p) - h.offset) * inv_norm;
        if (sd[i] > kEpsGeom) all_in = false; else all_out = false;
    }
    if (all_in) return poly;
    if (all_out) return {};

    ConvexPolygon out;
    out.v.reserve(n + 2);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = (i + 1) % n;
        const bool in_i = sd[i] <= kEpsGeom;
        const bool in_j = sd[j] <= kEpsGeom;
        if (in_i) out.v.push_back(poly.v[i]);
        if (in_i != in_j) {
            const double t = sd[i] / (sd[i] - sd[j]);
            Point2 x = poly.v[i].p + (poly.v[j].p - poly.v[i].p) * t;
            // leaving: travel continues along the clip line;
            // entering: travel resumes along the crossed edge's line
            out.v.push_back({x, in_i ? clip_line : poly.v[i].line});
        }
    }

    // drop consecutive near-duplicate vertices from grazing cuts
    ConvexPolygon clean;
    clean.v.reserve(out.v.size());
    for (const auto& vert : out.v) {
        if (!clean.v.empty() && dist(clean.v.back().p, vert.p) <= kEpsGeom) {
            clean.v.back().line = vert.line;
            continue;
        }
        clean.v.push_back(vert);
    }
    while (clean.v.size() >= 2 && dist(clean.v.front().p, clean.v.back().p) <= kEpsGeom) {
        clean.v.front().line = clean.v.back().line;
        clean.v.pop_back();
    }
    if (clean.v.size() < 3) return {};
    return clean;
}

/// Integrals over a polygon against a linear density: mass, first moment
/// and the quadratic transport cost relative to a site.
struct Moments {
    double mass = 0.0;
    Vec2 first{0.0, 0.0};
    double cost = 0.0;

    Moments& operator+=(const Moments& o) {
        mass += o.mass;
        first += o.first;
        cost += o.cost;
        return *this;
    }
};

namespace detail {

// Degree-3 symmetric triangle rule (4 points, exact for total degree <= 3).
struct TriQuadPoint {
    double b0, b1, b2, w;
};
inline constexpr std::array<TriQuadPoint, 4> kTriRuleDeg3 = {{
    {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, -27.0 / 48.0},
    {3.0 / 5.0, 1.0 / 5.0, 1.0 / 5.0, 25.0 / 48.0},
    {1.0 / 5.0, 3.0 / 5.0, 1.0 / 5.0, 25.0 / 48.0},
    {1.0 / 5.0, 1.0 / 5.0, 3.0 / 5.0, 25.0 / 48.0},
}};

inline Moments triangle_moments(const Point2& a, const Point2& b, const Point2& c,
                                const LinearDensity& rho, const Point2& site) {
    const double twice_area = (b - a).cross(c - a);
    Moments m;
    for (const TriQuadPoint& q : kTriRuleDeg3) {
        const Point2 p = a * q.b0 + b * q.b1 + c * q.b2;
        const double f = rho(p) * q.w;
        m.mass += f;
        m.first += p * f;
        m.cost += dist2(p, site) * f;
    }
    const double half_j = 0.5 * twice_area;
    m.mass *= half_j;
    m.first = m.first * half_j;
    m.cost *= half_j;
    return m;
}

}  // namespace detail

/// Exact integrals of rho, p*rho and |p - site|^2 * rho over poly (the
/// integrand is total degree 3, matching the quadrature rule's exactness).
/// Throws if rho is negative at a polygon vertex, which indicates corrupt
/// mesh data since densities are linear.
inline Moments polygon_moments(const ConvexPolygon& poly, const LinearDensity& rho,
                               const Point2& site) {
    Moments m;
    if (poly.empty()) return m;

    const double scale = 1.0 + std::abs(rho.offset) + std::abs(rho.grad.x) + std::abs(rho.grad.y);
    for (const auto& vert : poly.v) {
        if (rho(vert.p) < -kEpsGeom * scale) {
            throw Error("polygon_moments: density negative at polygon vertex");
        }
    }
    for (std::size_t i = 1; i + 1 < poly.v.size(); ++i) {
        m += detail::triangle_moments(poly.v[0].p, poly.v[i].p, poly.v[i + 1].p, rho, site);
    }
    return m;
}

}  // namespace symot
