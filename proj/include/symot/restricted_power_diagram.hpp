// Power diagrams of weighted sites restricted to a density mesh: per-cell
// polygon pieces clipped triangle by triangle, cached moments and the cell
// adjacency graph.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <queue>
#include <set>
#include <thread>
#include <utility>
#include <vector>

#include "symot/density_mesh.hpp"
#include "symot/geom2d.hpp"

namespace symot {

using WeightVector = std::vector<double>;

inline double power_distance(const Point2& p, const Point2& site, double w) {
    return dist2(p, site) - w;
}

namespace detail {

/// Uniform grid over the sites supporting exact nearest-first enumeration:
/// sites come out in nondecreasing Euclidean distance from the query point,
/// certified by ring lower bounds, so pruned scans stay exact.
class SiteGrid {
public:
    void build(const std::vector<Point2>& sites) {
        sites_ = &sites;
        const int n = static_cast<int>(sites.size());
        lo_ = hi_ = sites.empty() ? Point2{0, 0} : sites[0];
        for (const Point2& p : sites) {
            lo_.x = std::min(lo_.x, p.x);
            lo_.y = std::min(lo_.y, p.y);
            hi_.x = std::max(hi_.x, p.x);
            hi_.y = std::max(hi_.y, p.y);
        }
        const double pad = 1e-9 + 1e-9 * std::max(hi_.x - lo_.x, hi_.y - lo_.y);
        lo_ -= Vec2{pad, pad};
        hi_ += Vec2{pad, pad};
        dim_ = std::clamp(static_cast<int>(std::ceil(std::sqrt(n / 2.0))), 1, 512);
        hx_ = (hi_.x - lo_.x) / dim_;
        hy_ = (hi_.y - lo_.y) / dim_;
        cell_of_.assign(static_cast<std::size_t>(dim_) * dim_, {});
        for (int i = 0; i < n; ++i) {
            cell_of_[cell_index(cx(sites[i].x), cy(sites[i].y))].push_back(i);
        }
    }

    class Cursor {
    public:
        Cursor(const SiteGrid& g, const Point2& q) : g_(&g), q_(q) {
            qx_ = g.cx(q.x);
            qy_ = g.cy(q.y);
        }

        /// Next site by distance; false once all sites were produced.
        bool next(int& site, double& d2) {
            while (heap_.empty() || heap_.top().first > lb2_) {
                if (!expand()) break;
            }
            if (heap_.empty()) return false;
            site = heap_.top().second;
            d2 = heap_.top().first;
            heap_.pop();
            return true;
        }

    private:
        bool expand() {
            if (exhausted_) return false;
            ++ring_;
            const int x0 = qx_ - ring_, x1 = qx_ + ring_;
            const int y0 = qy_ - ring_, y1 = qy_ + ring_;
            bool any_cell = false;
            auto take = [&](int x, int y) {
                if (x < 0 || y < 0 || x >= g_->dim_ || y >= g_->dim_) return;
                any_cell = true;
                for (int s : g_->cell_of_[g_->cell_index(x, y)]) {
                    heap_.emplace(dist2(q_, (*g_->sites_)[s]), s);
                }
            };
            if (ring_ == 0) {
                take(qx_, qy_);
                any_cell = true;
            } else {
                for (int x = x0; x <= x1; ++x) {
                    take(x, y0);
                    take(x, y1);
                }
                for (int y = y0 + 1; y < y1; ++y) {
                    take(x0, y);
                    take(x1, y);
                }
            }
            // distance to the nearest cell not yet visited (slab bound)
            double lb = std::numeric_limits<double>::infinity();
            bool open = false;
            if (x0 > 0) { lb = std::min(lb, q_.x - (g_->lo_.x + x0 * g_->hx_)); open = true; }
            if (x1 < g_->dim_ - 1) { lb = std::min(lb, g_->lo_.x + (x1 + 1) * g_->hx_ - q_.x); open = true; }
            if (y0 > 0) { lb = std::min(lb, q_.y - (g_->lo_.y + y0 * g_->hy_)); open = true; }
            if (y1 < g_->dim_ - 1) { lb = std::min(lb, g_->lo_.y + (y1 + 1) * g_->hy_ - q_.y); open = true; }
            if (!open) {
                exhausted_ = true;
                lb2_ = std::numeric_limits<double>::infinity();
            } else {
                lb = std::max(lb, 0.0);
                lb2_ = lb * lb;
            }
            return any_cell || !exhausted_;
        }

        const SiteGrid* g_;
        Point2 q_;
        int qx_ = 0, qy_ = 0;
        int ring_ = -1;
        double lb2_ = -1.0;
        bool exhausted_ = false;
        std::priority_queue<std::pair<double, int>, std::vector<std::pair<double, int>>,
                            std::greater<>> heap_;
    };

    Cursor cursor(const Point2& q) const { return Cursor(*this, q); }

private:
    friend class Cursor;
    std::size_t cell_index(int x, int y) const {
        return static_cast<std::size_t>(y) * dim_ + x;
    }
    int cx(double x) const {
        return std::clamp(static_cast<int>((x - lo_.x) / hx_), 0, dim_ - 1);
    }
    int cy(double y) const {
        return std::clamp(static_cast<int>((y - lo_.y) / hy_), 0, dim_ - 1);
    }

    const std::vector<Point2>* sites_ = nullptr;
    Point2 lo_{0, 0}, hi_{0, 0};
    int dim_ = 1;
    double hx_ = 1.0, hy_ = 1.0;
    std::vector<std::vector<int>> cell_of_;
};

template <class F>
void parallel_for(int count, int threads, F&& body) {
    threads = std::max(1, std::min(threads, count));
    if (threads <= 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int w = 0; w < threads; ++w) {
        pool.emplace_back([=]() {
            for (int i = w; i < count; i += threads) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace detail

struct RpdPiece {
    int triangle = -1;
    ConvexPolygon poly;
};

struct RestrictedCell {
    int site = -1;
    std::vector<RpdPiece> pieces;
    Moments moments;

    bool empty() const { return pieces.empty(); }
};

struct CellStats {
    double mass = 0.0;
    double cost = 0.0;
    std::optional<Point2> barycenter;  // unset for empty cells
};

struct RpdOptions {
    bool brute_force = false;  // reference O(N^2) construction, for checking
    int threads = 1;
};

/// The power diagram of (sites, weights) intersected with the mesh. Cells
/// partition the mesh support; each mesh point belongs to the cell whose site
/// minimizes |x - x_i|^2 - w_i.
class RestrictedPowerDiagram {
public:
    const DensityMesh* mesh = nullptr;
    SiteSet sites;
    WeightVector weights;
    std::vector<RestrictedCell> cells;
    std::vector<std::pair<int, int>> adjacency;  // sorted unordered pairs, i < j

    int site_count() const { return static_cast<int>(sites.positions.size()); }

    CellStats cell_stats(int i) const {
        const RestrictedCell& c = cells[i];
        CellStats s;
        s.mass = c.moments.mass;
        s.cost = c.moments.cost;
        if (c.moments.mass > 0.0 && !c.pieces.empty()) {
            s.barycenter = c.moments.first / c.moments.mass;
        }
        return s;
    }

    double total_cell_mass() const {
        double m = 0.0;
        for (const auto& c : cells) m += c.moments.mass;
        return m;
    }

    std::vector<int> empty_cell_indices() const {
        std::vector<int> out;
        for (int i = 0; i < site_count(); ++i) {
            if (cells[i].empty()) out.push_back(i);
        }
        return out;
    }

    /// Cell indices whose pieces touch more than one connected component of
    /// the mesh (the overlapping-cell failure mode).
    std::vector<int> component_spanning_cells() const {
        std::vector<int> out;
        for (const auto& c : cells) {
            int comp = -1;
            bool spans = false;
            for (const auto& piece : c.pieces) {
                const int pc = mesh->component_of(piece.triangle);
                if (comp < 0) comp = pc;
                else if (comp != pc) { spans = true; break; }
            }
            if (spans) out.push_back(c.site);
        }
        return out;
    }
};

inline RestrictedPowerDiagram build_rpd(const DensityMesh& mesh, const SiteSet& sites,
                                        const WeightVector& weights,
                                        const RpdOptions& opts = {}) {
    const int n = sites.count();
    if (static_cast<int>(weights.size()) != n)
        throw Error("build_rpd: sites/weights length mismatch");
    if (n < 1) throw Error("build_rpd: need at least one site");
    for (const Point2& p : sites.positions) {
        if (!p.finite()) throw Error("build_rpd: non-finite site");
    }
    for (double w : weights) {
        if (!std::isfinite(w)) throw Error("build_rpd: non-finite weight");
    }

    detail::SiteGrid grid;
    grid.build(sites.positions);

    // coincident sites make the bisector undefined
    for (int i = 0; i < n && n > 1; ++i) {
        auto cur = grid.cursor(sites.positions[i]);
        int s;
        double d2;
        while (cur.next(s, d2)) {
            if (s == i) continue;
            if (d2 <= kEpsGeom * kEpsGeom)
                throw Error("build_rpd: duplicate sites " + std::to_string(std::min(i, s)) +
                            " and " + std::to_string(std::max(i, s)));
            break;
        }
    }

    const double w_max = *std::max_element(weights.begin(), weights.end());
    const int nt = static_cast<int>(mesh.triangles.size());

    struct TriPiece {
        int site;
        ConvexPolygon poly;
    };
    std::vector<std::vector<TriPiece>> tri_pieces(nt);
    std::vector<std::vector<std::pair<int, int>>> tri_adj(nt);

    auto clip_cell_in_triangle = [&](int i, const ConvexPolygon& tri_poly) -> ConvexPolygon {
        ConvexPolygon piece = tri_poly;
        if (n == 1) return piece;
        const Point2 xi = sites.positions[i];
        double r2 = 0.0;
        for (const auto& v : piece.v) r2 = std::max(r2, dist2(v.p, xi));

        auto cur = grid.cursor(xi);
        int j;
        double d2;
        while (cur.next(j, d2)) {
            if (j == i) continue;
            const double d = std::sqrt(d2);
            const double r = std::sqrt(r2);
            if (d > r) {
                const double margin = (d - r) * (d - r) - r2 - (w_max - weights[i]);
                if (margin > kEpsGeom) break;  // no farther site can cut the piece
            }
            const HalfPlane h =
                HalfPlane::power_bisector(xi, weights[i], sites.positions[j], weights[j]);
            ConvexPolygon cut = clip_polygon_halfplane(piece, h, line_of_bisector(j));
            if (cut.empty()) return {};
            bool changed = cut.size() != piece.size();
            if (!changed) {
                for (std::size_t k = 0; k < cut.size(); ++k) {
                    if (!(cut.v[k].p == piece.v[k].p)) { changed = true; break; }
                }
            }
            piece = std::move(cut);
            if (changed) {
                r2 = 0.0;
                for (const auto& v : piece.v) r2 = std::max(r2, dist2(v.p, xi));
            }
        }
        return piece;
    };

    auto process_triangle = [&](int t) {
        const ConvexPolygon tri_poly = mesh.triangle_polygon(t);
        std::vector<TriPiece>& out = tri_pieces[t];
        std::vector<std::pair<int, int>>& adj = tri_adj[t];

        if (opts.brute_force) {
            for (int i = 0; i < n; ++i) {
                ConvexPolygon piece = clip_cell_in_triangle(i, tri_poly);
                if (!piece.empty() && piece.area() >= kEpsGeom)
                    out.push_back({i, std::move(piece)});
            }
        } else {
            // seed with the power-nearest site of the centroid, then flood the
            // piece adjacency: each surviving bisector edge names a neighbor
            // whose cell also meets this triangle
            Point2 c{0, 0};
            for (const auto& v : tri_poly.v) c += v.p;
            c = c / static_cast<double>(tri_poly.size());

            auto cur = grid.cursor(c);
            int best = -1, s;
            double best_pow = std::numeric_limits<double>::infinity(), d2;
            while (cur.next(s, d2)) {
                const double pw = d2 - weights[s];
                if (pw < best_pow) { best_pow = pw; best = s; }
                if (d2 - w_max > best_pow) break;
            }

            std::vector<int> queue{best};
            std::vector<char> seen(n, 0);
            seen[best] = 1;
            for (std::size_t qi = 0; qi < queue.size(); ++qi) {
                const int i = queue[qi];
                ConvexPolygon piece = clip_cell_in_triangle(i, tri_poly);
                if (piece.empty()) continue;
                for (const auto& v : piece.v) {
                    if (is_bisector_line(v.line)) {
                        const int j = bisector_site(v.line);
                        if (!seen[j]) { seen[j] = 1; queue.push_back(j); }
                    }
                }
                if (piece.area() >= kEpsGeom) out.push_back({i, std::move(piece)});
            }
        }

        std::sort(out.begin(), out.end(),
                  [](const TriPiece& a, const TriPiece& b) { return a.site < b.site; });

        for (const TriPiece& tp : out) {
            const auto& verts = tp.poly.v;
            for (std::size_t k = 0; k < verts.size(); ++k) {
                if (!is_bisector_line(verts[k].line)) continue;
                const std::size_t k2 = (k + 1) % verts.size();
                if (dist(verts[k].p, verts[k2].p) > kEpsGeom) {
                    const int j = bisector_site(verts[k].line);
                    adj.emplace_back(std::min(tp.site, j), std::max(tp.site, j));
                }
            }
        }
    };

    detail::parallel_for(nt, opts.threads, process_triangle);

    RestrictedPowerDiagram rpd;
    rpd.mesh = &mesh;
    rpd.sites = sites;
    rpd.weights = weights;
    rpd.cells.resize(n);
    for (int i = 0; i < n; ++i) rpd.cells[i].site = i;

    std::set<std::pair<int, int>> adj_set;
    for (int t = 0; t < nt; ++t) {
        for (TriPiece& tp : tri_pieces[t]) {
            RestrictedCell& cell = rpd.cells[tp.site];
            cell.moments += polygon_moments(tp.poly, mesh.triangle_density(t),
                                            sites.positions[tp.site]);
            cell.pieces.push_back({t, std::move(tp.poly)});
        }
        adj_set.insert(tri_adj[t].begin(), tri_adj[t].end());
    }
    rpd.adjacency.assign(adj_set.begin(), adj_set.end());
    return rpd;
}

/// Pairs of cells sharing a boundary segment longer than kEpsGeom.
inline const std::vector<std::pair<int, int>>& neighbor_graph(const RestrictedPowerDiagram& rpd) {
    return rpd.adjacency;
}

/// Brute-force winner of the power-distance competition at p; the oracle the
/// constructed diagram is checked against.
inline int nearest_power_site(const std::vector<Point2>& sites, const WeightVector& weights,
                              const Point2& p) {
    int best = 0;
    double best_pow = power_distance(p, sites[0], weights[0]);
    for (std::size_t i = 1; i < sites.size(); ++i) {
        const double pw = power_distance(p, sites[i], weights[i]);
        if (pw < best_pow) { best_pow = pw; best = static_cast<int>(i); }
    }
    return best;
}

/// Point location through the stored pieces (linear scan; test helper).
inline std::optional<int> locate_in_pieces(const RestrictedPowerDiagram& rpd, const Point2& p,
                                           double eps = kEpsGeom) {
    for (const auto& cell : rpd.cells) {
        for (const auto& piece : cell.pieces) {
            bool inside = true;
            const auto& verts = piece.poly.v;
            for (std::size_t k = 0; k < verts.size() && inside; ++k) {
                const Point2& a = verts[k].p;
                const Point2& b = verts[(k + 1) % verts.size()].p;
                if ((b - a).cross(p - a) < -eps) inside = false;
            }
            if (inside) return cell.site;
        }
    }
    return std::nullopt;
}

}  // namespace symot
