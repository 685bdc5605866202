// Piecewise-linear measures on 2-d triangle meshes: parsing, validation,
// total mass and random site sampling.
#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <istream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "symot/geom2d.hpp"
#include "symot/rng.hpp"

namespace symot {

struct MeshEdge {
    int a = -1, b = -1;            // vertex indices, a < b
    int tri[2] = {-1, -1};         // incident triangles (second is -1 on the boundary)
    bool boundary() const { return tri[1] < 0; }
};

/// Triangle mesh carrying one nonnegative density value per vertex; the
/// measure is the linear interpolation of those values over each triangle.
class DensityMesh {
public:
    std::vector<Point2> vertices;
    std::vector<double> densities;
    std::vector<std::array<int, 3>> triangles;

    DensityMesh() = default;
    DensityMesh(std::vector<Point2> verts, std::vector<double> dens,
                std::vector<std::array<int, 3>> tris)
        : vertices(std::move(verts)), densities(std::move(dens)), triangles(std::move(tris)) {
        finalize();
    }

    /// Validates invariants and builds the derived tables (edges, per-triangle
    /// densities, connected components). Must be called after any direct edit
    /// of the public fields.
    void finalize() {
        if (vertices.size() != densities.size())
            throw Error("mesh: vertex/density count mismatch");
        for (std::size_t i = 0; i < vertices.size(); ++i) {
            if (!vertices[i].finite()) throw Error("mesh: non-finite vertex " + std::to_string(i));
            if (densities[i] < 0.0) throw Error("mesh: negative density at vertex " + std::to_string(i));
        }

        tri_area_.resize(triangles.size());
        tri_density_.resize(triangles.size());
        const int nv = static_cast<int>(vertices.size());
        for (std::size_t t = 0; t < triangles.size(); ++t) {
            const auto& tr = triangles[t];
            for (int k = 0; k < 3; ++k) {
                if (tr[k] < 0 || tr[k] >= nv)
                    throw Error("mesh: triangle " + std::to_string(t) + " index out of range");
            }
            const Point2 &a = vertices[tr[0]], &b = vertices[tr[1]], &c = vertices[tr[2]];
            const double twice = (b - a).cross(c - a);
            if (!(twice > 0.0))
                throw Error("mesh: triangle " + std::to_string(t) + " has negative area");
            tri_area_[t] = 0.5 * twice;
            tri_density_[t] = plane_through(tr);
        }

        build_edges();
        build_components();

        total_mass_ = 0.0;
        for (std::size_t t = 0; t < triangles.size(); ++t) {
            const auto& tr = triangles[t];
            const double mean = (densities[tr[0]] + densities[tr[1]] + densities[tr[2]]) / 3.0;
            total_mass_ += tri_area_[t] * mean;
        }
        if (!(total_mass_ > 0.0)) throw Error("mesh: total mass must be positive");

        bbox_min_ = bbox_max_ = vertices.empty() ? Point2{0, 0} : vertices[0];
        for (const Point2& p : vertices) {
            bbox_min_.x = std::min(bbox_min_.x, p.x);
            bbox_min_.y = std::min(bbox_min_.y, p.y);
            bbox_max_.x = std::max(bbox_max_.x, p.x);
            bbox_max_.y = std::max(bbox_max_.y, p.y);
        }
    }

    double total_mass() const { return total_mass_; }
    double triangle_area(int t) const { return tri_area_[t]; }
    const LinearDensity& triangle_density(int t) const { return tri_density_[t]; }

    const std::vector<MeshEdge>& edges() const { return edges_; }
    int edge_index(int va, int vb) const {
        auto it = edge_lookup_.find(ordered(va, vb));
        return it == edge_lookup_.end() ? -1 : it->second;
    }
    bool edge_is_boundary(int e) const { return edges_[e].boundary(); }

    int component_of(int triangle) const { return tri_component_[triangle]; }
    int component_count() const { return component_count_; }

    Point2 bbox_min() const { return bbox_min_; }
    Point2 bbox_max() const { return bbox_max_; }
    double diameter() const { return (bbox_max_ - bbox_min_).norm(); }

    /// The mesh triangle as a tagged polygon whose edge lines reference the
    /// global edge table (needed by the power diagram's vertex provenance).
    ConvexPolygon triangle_polygon(int t) const {
        const auto& tr = triangles[t];
        return ConvexPolygon::triangle(
            vertices[tr[0]], vertices[tr[1]], vertices[tr[2]],
            line_of_mesh_edge(edge_index(tr[0], tr[1])),
            line_of_mesh_edge(edge_index(tr[1], tr[2])),
            line_of_mesh_edge(edge_index(tr[2], tr[0])));
    }

    bool point_in_triangle(int t, const Point2& p, double eps = kEpsGeom) const {
        const auto& tr = triangles[t];
        const Point2 &a = vertices[tr[0]], &b = vertices[tr[1]], &c = vertices[tr[2]];
        return (b - a).cross(p - a) >= -eps && (c - b).cross(p - b) >= -eps &&
               (a - c).cross(p - c) >= -eps;
    }

private:
    static std::pair<int, int> ordered(int a, int b) { return {std::min(a, b), std::max(a, b)}; }

    LinearDensity plane_through(const std::array<int, 3>& tr) const {
        const Point2 &a = vertices[tr[0]], &b = vertices[tr[1]], &c = vertices[tr[2]];
        const double da = densities[tr[0]], db = densities[tr[1]], dc = densities[tr[2]];
        const double twice = (b - a).cross(c - a);
        LinearDensity lin;
        lin.grad.x = ((db - da) * (c.y - a.y) - (dc - da) * (b.y - a.y)) / twice;
        lin.grad.y = ((dc - da) * (b.x - a.x) - (db - da) * (c.x - a.x)) / twice;
        lin.offset = da - lin.grad.dot(a);
        return lin;
    }

    void build_edges() {
        edges_.clear();
        edge_lookup_.clear();
        for (std::size_t t = 0; t < triangles.size(); ++t) {
            const auto& tr = triangles[t];
            for (int k = 0; k < 3; ++k) {
                const auto key = ordered(tr[k], tr[(k + 1) % 3]);
                auto [it, inserted] = edge_lookup_.try_emplace(key, static_cast<int>(edges_.size()));
                if (inserted) {
                    MeshEdge e;
                    e.a = key.first;
                    e.b = key.second;
                    e.tri[0] = static_cast<int>(t);
                    edges_.push_back(e);
                } else {
                    MeshEdge& e = edges_[it->second];
                    if (e.tri[1] >= 0)
                        throw Error("mesh: edge (" + std::to_string(key.first) + "," +
                                    std::to_string(key.second) + ") shared by more than 2 triangles");
                    e.tri[1] = static_cast<int>(t);
                }
            }
        }
    }

    void build_components() {
        const int nt = static_cast<int>(triangles.size());
        std::vector<int> parent(nt);
        std::iota(parent.begin(), parent.end(), 0);
        auto find = [&](int x) {
            while (parent[x] != x) x = parent[x] = parent[parent[x]];
            return x;
        };
        for (const MeshEdge& e : edges_) {
            if (e.tri[1] >= 0) parent[find(e.tri[0])] = find(e.tri[1]);
        }
        tri_component_.assign(nt, -1);
        component_count_ = 0;
        for (int t = 0; t < nt; ++t) {
            const int r = find(t);
            if (tri_component_[r] < 0) tri_component_[r] = component_count_++;
            tri_component_[t] = tri_component_[r];
        }
    }

    std::vector<double> tri_area_;
    std::vector<LinearDensity> tri_density_;
    std::vector<MeshEdge> edges_;
    std::map<std::pair<int, int>, int> edge_lookup_;
    std::vector<int> tri_component_;
    int component_count_ = 0;
    double total_mass_ = 0.0;
    Point2 bbox_min_{0, 0}, bbox_max_{0, 0};
};

enum class SampleMode { kArea, kMass };

inline const char* to_string(SampleMode m) { return m == SampleMode::kArea ? "area" : "mass"; }

/// Discrete sample set with the uniform target mass total_mass / N.
struct SiteSet {
    std::vector<Point2> positions;
    double target_mass = 0.0;

    int count() const { return static_cast<int>(positions.size()); }
};

// ---------------------------------------------------------------------------
// Mesh text format: '#' starts a comment; "v <x> <y> <density>" declares a
// vertex, "t <i> <j> <k>" a counter-clockwise triangle of zero-based indices.
// ---------------------------------------------------------------------------

inline DensityMesh parse_mesh(std::istream& in) {
    std::vector<Point2> verts;
    std::vector<double> dens;
    std::vector<std::array<int, 3>> tris;

    std::string line;
    int lineno = 0;
    auto fail = [&](const std::string& what) {
        throw Error("mesh parse error at line " + std::to_string(lineno) + ": " + what);
    };

    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag)) continue;
        if (tag == "v") {
            double x, y, d;
            if (!(ls >> x >> y >> d)) fail("expected 'v <x> <y> <density>'");
            if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(d))
                fail("non-finite vertex data");
            if (d < 0.0) fail("negative density");
            verts.push_back({x, y});
            dens.push_back(d);
        } else if (tag == "t") {
            int i, j, k;
            if (!(ls >> i >> j >> k)) fail("expected 't <i> <j> <k>'");
            const int nv = static_cast<int>(verts.size());
            if (i < 0 || j < 0 || k < 0 || i >= nv || j >= nv || k >= nv)
                fail("vertex index out of range");
            const double twice = (verts[j] - verts[i]).cross(verts[k] - verts[i]);
            if (!(twice > 0.0)) fail("negative area");
            tris.push_back({i, j, k});
        } else {
            fail("unknown record '" + tag + "'");
        }
        std::string extra;
        if (ls >> extra) fail("trailing data '" + extra + "'");
    }
    if (tris.empty()) {
        lineno = 0;
        fail("mesh has no triangles");
    }
    return DensityMesh(std::move(verts), std::move(dens), std::move(tris));
}

inline DensityMesh parse_mesh(const std::string& text) {
    std::istringstream in(text);
    return parse_mesh(in);
}

/// Exact total measure: sum over triangles of area times the mean of the
/// three vertex densities.
inline double total_mass(const DensityMesh& mesh) { return mesh.total_mass(); }

/// Draws n sites: a triangle is chosen proportionally to its area (or mass),
/// then a point uniformly inside it via the sqrt barycentric warp. Bit-stable
/// for a fixed (mesh, n, seed, mode).
inline SiteSet sample_sites(const DensityMesh& mesh, int n, std::uint64_t seed,
                            SampleMode mode = SampleMode::kArea) {
    if (n < 1) throw Error("sample_sites: n must be >= 1");

    const std::size_t nt = mesh.triangles.size();
    std::vector<double> cdf(nt);
    double acc = 0.0;
    for (std::size_t t = 0; t < nt; ++t) {
        double w = mesh.triangle_area(static_cast<int>(t));
        if (mode == SampleMode::kMass) {
            const auto& tr = mesh.triangles[t];
            w *= (mesh.densities[tr[0]] + mesh.densities[tr[1]] + mesh.densities[tr[2]]) / 3.0;
        }
        acc += w;
        cdf[t] = acc;
    }

    Rng rng(seed);
    SiteSet sites;
    sites.positions.reserve(n);
    sites.target_mass = mesh.total_mass() / n;
    for (int i = 0; i < n; ++i) {
        const double r = rng.uniform01() * acc;
        const std::size_t t = std::min<std::size_t>(
            nt - 1, std::lower_bound(cdf.begin(), cdf.end(), r) - cdf.begin());
        const auto& tr = mesh.triangles[t];
        const double su = std::sqrt(rng.uniform01());
        const double v = rng.uniform01();
        const Point2 p = mesh.vertices[tr[0]] * (1.0 - su) +
                         mesh.vertices[tr[1]] * (su * (1.0 - v)) +
                         mesh.vertices[tr[2]] * (su * v);
        sites.positions.push_back(p);
    }
    return sites;
}

}  // namespace symot
