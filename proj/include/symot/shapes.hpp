// Procedural test and demo meshes: rectangles, disks, disk unions, stars,
// optionally with non-uniform densities.
#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "symot/density_mesh.hpp"

namespace symot {

using DensityField = std::function<double(const Point2&)>;

inline DensityField uniform_density(double value = 1.0) {
    return [value](const Point2&) { return value; };
}

inline DensityField gaussian_mixture(std::vector<Point2> centers, double sigma,
                                     double floor_value = 0.05) {
    return [centers = std::move(centers), sigma, floor_value](const Point2& p) {
        double v = floor_value;
        for (const Point2& c : centers) v += std::exp(-dist2(p, c) / (2.0 * sigma * sigma));
        return v;
    };
}

/// Axis-aligned rectangle triangulated on an (nx x ny)-cell grid.
inline DensityMesh make_rect_mesh(Point2 lo, Point2 hi, int nx, int ny,
                                  const DensityField& density = uniform_density()) {
    std::vector<Point2> verts;
    std::vector<double> dens;
    std::vector<std::array<int, 3>> tris;
    for (int j = 0; j <= ny; ++j) {
        for (int i = 0; i <= nx; ++i) {
            Point2 p{lo.x + (hi.x - lo.x) * i / nx, lo.y + (hi.y - lo.y) * j / ny};
            verts.push_back(p);
            dens.push_back(density(p));
        }
    }
    auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            tris.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            tris.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    }
    return DensityMesh(std::move(verts), std::move(dens), std::move(tris));
}

inline DensityMesh make_unit_square_mesh(int cells_per_side = 1,
                                         const DensityField& density = uniform_density()) {
    return make_rect_mesh({0, 0}, {1, 1}, cells_per_side, cells_per_side, density);
}

namespace detail {

inline void append_disk(std::vector<Point2>& verts, std::vector<double>& dens,
                        std::vector<std::array<int, 3>>& tris, Point2 center, double radius,
                        int rings, const DensityField& density) {
    const int base = static_cast<int>(verts.size());
    verts.push_back(center);
    dens.push_back(density(center));
    std::vector<int> ring_start(rings + 1, 0);
    for (int r = 1; r <= rings; ++r) {
        ring_start[r] = static_cast<int>(verts.size()) - base;
        const int count = 6 * r;
        const double rad = radius * r / rings;
        for (int k = 0; k < count; ++k) {
            const double a = 2.0 * std::numbers::pi * k / count;
            Point2 p{center.x + rad * std::cos(a), center.y + rad * std::sin(a)};
            verts.push_back(p);
            dens.push_back(density(p));
        }
    }
    auto vid = [&](int r, int k) {
        if (r == 0) return base;
        const int count = 6 * r;
        return base + ring_start[r] + ((k % count) + count) % count;
    };
    // stitch ring r-1 (6(r-1) vertices) to ring r (6r vertices), sector by sector
    for (int r = 1; r <= rings; ++r) {
        const int outer = 6 * r;
        for (int s = 0; s < 6; ++s) {
            for (int k = 0; k < r; ++k) {
                const int o = s * r + k;
                const int in = s * (r - 1) + k;
                tris.push_back({vid(r, o), vid(r, o + 1), vid(r - 1, in)});
                if (k + 1 < r) {
                    tris.push_back({vid(r, o + 1), vid(r - 1, in + 1), vid(r - 1, in)});
                }
            }
        }
    }
}

}  // namespace detail

/// Disk triangulated with 6r vertices on ring r; triangle count is 6*rings^2.
inline DensityMesh make_disk_mesh(Point2 center, double radius, int rings = 12,
                                  const DensityField& density = uniform_density()) {
    std::vector<Point2> verts;
    std::vector<double> dens;
    std::vector<std::array<int, 3>> tris;
    detail::append_disk(verts, dens, tris, center, radius, rings, density);
    return DensityMesh(std::move(verts), std::move(dens), std::move(tris));
}

/// Disjoint union of disks in one mesh (multiple connected components).
inline DensityMesh make_disks_mesh(const std::vector<std::pair<Point2, double>>& disks,
                                   int rings = 12,
                                   const DensityField& density = uniform_density()) {
    std::vector<Point2> verts;
    std::vector<double> dens;
    std::vector<std::array<int, 3>> tris;
    for (const auto& [center, radius] : disks) {
        detail::append_disk(verts, dens, tris, center, radius, rings, density);
    }
    return DensityMesh(std::move(verts), std::move(dens), std::move(tris));
}

/// Star with `points` tips, triangulated as a fan around the center.
inline DensityMesh make_star_mesh(Point2 center, double r_outer, double r_inner, int points,
                                  int subdiv = 6,
                                  const DensityField& density = uniform_density()) {
    std::vector<Point2> boundary;
    const int m = 2 * points;
    for (int k = 0; k < m; ++k) {
        const double a = 2.0 * std::numbers::pi * k / m + std::numbers::pi / 2;
        const double rad = (k % 2 == 0) ? r_outer : r_inner;
        boundary.push_back({center.x + rad * std::cos(a), center.y + rad * std::sin(a)});
    }
    std::vector<Point2> verts{center};
    std::vector<std::array<int, 3>> tris;
    // fan of `subdiv` concentric layers toward each boundary edge
    const int ring_count = static_cast<int>(boundary.size());
    std::vector<std::vector<int>> layer_ids(subdiv + 1);
    layer_ids[0] = {0};
    for (int l = 1; l <= subdiv; ++l) {
        for (int k = 0; k < ring_count; ++k) {
            const Point2 p = center + (boundary[k] - center) * (static_cast<double>(l) / subdiv);
            layer_ids[l].push_back(static_cast<int>(verts.size()));
            verts.push_back(p);
        }
    }
    for (int k = 0; k < ring_count; ++k) {
        const int k1 = (k + 1) % ring_count;
        tris.push_back({0, layer_ids[1][k], layer_ids[1][k1]});
        for (int l = 1; l < subdiv; ++l) {
            tris.push_back({layer_ids[l][k], layer_ids[l + 1][k], layer_ids[l + 1][k1]});
            tris.push_back({layer_ids[l][k], layer_ids[l + 1][k1], layer_ids[l][k1]});
        }
    }
    std::vector<double> dens;
    dens.reserve(verts.size());
    for (const Point2& p : verts) dens.push_back(density(p));
    return DensityMesh(std::move(verts), std::move(dens), std::move(tris));
}

/// Serializes a mesh in the line-oriented text format read by parse_mesh.
inline std::string mesh_to_text(const DensityMesh& mesh) {
    std::string out;
    char buf[128];
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "v %.17g %.17g %.17g\n", mesh.vertices[i].x,
                      mesh.vertices[i].y, mesh.densities[i]);
        out += buf;
    }
    for (const auto& t : mesh.triangles) {
        std::snprintf(buf, sizeof(buf), "t %d %d %d\n", t[0], t[1], t[2]);
        out += buf;
    }
    return out;
}

}  // namespace symot
