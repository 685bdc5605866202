// Cross-diagram vertex correspondence and displacement-interpolated frames.
// Diagram vertices are identified by their incident-cell triples; exact key
// matches interpolate linearly, unmatched triple points split into boundary
// vertices (the transport map's discontinuities), and the cell polygons are
// rebuilt from the surviving vertices in cyclic order.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "symot/restricted_power_diagram.hpp"

namespace symot {

// ---------------------------------------------------------------------------
// Vertex keys and classification
// ---------------------------------------------------------------------------

/// Sorted triple of incident cell identifiers: 0 is the outside of the mesh,
/// 1..N is cell index + 1. The ordinal disambiguates vertices sharing a key
/// (ranked by angle around the key's cell barycenters).
struct VertexKey {
    std::array<int, 3> cells{0, 0, 0};
    int ordinal = 0;

    static VertexKey of(int a, int b, int c, int ordinal = 0) {
        VertexKey k;
        k.cells = {a, b, c};
        std::sort(k.cells.begin(), k.cells.end());
        k.ordinal = ordinal;
        return k;
    }

    int zeros() const {
        return static_cast<int>(cells[0] == 0) + (cells[1] == 0) + (cells[2] == 0);
    }
    bool contains(int id) const {
        return cells[0] == id || cells[1] == id || cells[2] == id;
    }
    bool valid() const {
        return cells[0] <= cells[1] && cells[1] <= cells[2] && zeros() <= 2 &&
               !(cells[0] == cells[1] && cells[1] == cells[2]) &&
               (cells[0] != cells[1] || cells[0] == 0) && cells[1] != cells[2];
    }

    auto operator<=>(const VertexKey&) const = default;
};

enum class VertexType {
    kDomainCorner,      // mesh vertex on the domain boundary: two zeros
    kBoundaryCrossing,  // cell border crossing the domain boundary: one zero
    kTriplePoint,       // three cells meeting: no zeros
};

inline const char* to_string(VertexType t) {
    switch (t) {
        case VertexType::kDomainCorner: return "corner";
        case VertexType::kBoundaryCrossing: return "crossing";
        case VertexType::kTriplePoint: return "triple";
    }
    return "?";
}

inline VertexType type_of(const VertexKey& k) {
    switch (k.zeros()) {
        case 0: return VertexType::kTriplePoint;
        case 1: return VertexType::kBoundaryCrossing;
        default: return VertexType::kDomainCorner;
    }
}

struct ClassifiedVertex {
    Point2 pos;
    VertexKey key;
    VertexType vtype = VertexType::kDomainCorner;
};

namespace detail {

/// Position welding on a uniform hash grid: points within eps of a stored
/// representative share its id. Insertion order fixes representatives, so
/// welding is deterministic.
class WeldGrid {
public:
    explicit WeldGrid(double eps) : eps_(eps), inv_(1.0 / eps) {}

    int find(const Point2& p) const {
        const std::int64_t cx = static_cast<std::int64_t>(std::floor(p.x * inv_));
        const std::int64_t cy = static_cast<std::int64_t>(std::floor(p.y * inv_));
        for (std::int64_t dy = -1; dy <= 1; ++dy) {
            for (std::int64_t dx = -1; dx <= 1; ++dx) {
                const auto it = map_.find(key(cx + dx, cy + dy));
                if (it == map_.end()) continue;
                for (const auto& [pos, id] : it->second) {
                    if (dist(pos, p) <= eps_) return id;
                }
            }
        }
        return -1;
    }

    int find_or_insert(const Point2& p) {
        const int found = find(p);
        if (found >= 0) return found;
        const int id = next_id_++;
        const std::int64_t cx = static_cast<std::int64_t>(std::floor(p.x * inv_));
        const std::int64_t cy = static_cast<std::int64_t>(std::floor(p.y * inv_));
        map_[key(cx, cy)].push_back({p, id});
        reps_.push_back(p);
        return id;
    }

    const Point2& representative(int id) const { return reps_[id]; }
    int size() const { return next_id_; }

private:
    static std::uint64_t key(std::int64_t x, std::int64_t y) {
        return static_cast<std::uint64_t>(x) * 0x9e3779b97f4a7c15ull ^
               static_cast<std::uint64_t>(y);
    }
    double eps_;
    double inv_;
    int next_id_ = 0;
    std::unordered_map<std::uint64_t, std::vector<std::pair<Point2, int>>> map_;
    std::vector<Point2> reps_;
};

}  // namespace detail

struct VertexClassification {
    std::vector<ClassifiedVertex> vertices;  // sorted by (key.cells, ordinal)
    double weld_eps = 0.0;

    /// Welded position lookup; -1 when p is not a classified vertex.
    int find(const Point2& p) const {
        const int group = grid_ ? grid_->find(p) : -1;
        if (group < 0 || group >= static_cast<int>(group_to_vertex_.size())) return -1;
        return group_to_vertex_[group];
    }

    std::shared_ptr<detail::WeldGrid> grid_;
    std::vector<int> group_to_vertex_;
};

/// Classifies every matchable vertex of the diagram: triple points, cell
/// borders crossing the domain boundary, and mesh vertices on the domain
/// boundary. Vertices produced by per-triangle clipping that lie in the mesh
/// interior without separating three cells are artifacts and are not emitted.
inline VertexClassification classify_vertices(const RestrictedPowerDiagram& rpd) {
    const DensityMesh& mesh = *rpd.mesh;
    const double eps = 1e-9 * std::max(mesh.diameter(), 1e-30);

    VertexClassification out;
    out.weld_eps = eps;
    out.grid_ = std::make_shared<detail::WeldGrid>(eps);
    detail::WeldGrid& grid = *out.grid_;

    struct Group {
        std::vector<int> cells;      // incident cell ids (site + 1)
        bool on_boundary = false;    // touches a boundary mesh edge
        bool mesh_vertex = false;    // both incident lines are mesh edges
    };
    std::vector<Group> groups;

    for (const RestrictedCell& cell : rpd.cells) {
        for (const RpdPiece& piece : cell.pieces) {
            const auto& verts = piece.poly.v;
            const std::size_t m = verts.size();
            for (std::size_t k = 0; k < m; ++k) {
                const LineRef incoming = verts[(k + m - 1) % m].line;
                const LineRef outgoing = verts[k].line;
                const int id = grid.find_or_insert(verts[k].p);
                if (id == static_cast<int>(groups.size())) groups.push_back({});
                Group& g = groups[id];
                g.cells.push_back(cell.site + 1);
                int mesh_lines = 0;
                for (const LineRef l : {incoming, outgoing}) {
                    if (is_bisector_line(l)) {
                        g.cells.push_back(bisector_site(l) + 1);
                    } else if (is_mesh_edge_line(l)) {
                        ++mesh_lines;
                        if (mesh.edge_is_boundary(mesh_edge_index(l))) g.on_boundary = true;
                    }
                }
                if (mesh_lines == 2) g.mesh_vertex = true;
            }
        }
    }

    out.group_to_vertex_.assign(groups.size(), -1);
    std::vector<std::pair<VertexKey, int>> keyed;  // (key sans ordinal, group id)
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        Group& g = groups[gi];
        std::sort(g.cells.begin(), g.cells.end());
        g.cells.erase(std::unique(g.cells.begin(), g.cells.end()), g.cells.end());
        VertexKey key;
        if (g.cells.size() >= 3) {
            key = VertexKey::of(g.cells[0], g.cells[1], g.cells[2]);
        } else if (g.cells.size() == 2 && g.on_boundary) {
            key = VertexKey::of(0, g.cells[0], g.cells[1]);
        } else if (g.cells.size() == 1 && g.on_boundary && g.mesh_vertex) {
            key = VertexKey::of(0, 0, g.cells[0]);
        } else {
            continue;  // interior clipping artifact
        }
        keyed.emplace_back(key, static_cast<int>(gi));
    }

    // ordinals: rank key-sharing vertices by angle around the mean barycenter
    // of the key's cells, so both diagrams order duplicates the same way
    std::sort(keyed.begin(), keyed.end(),
              [](const auto& a, const auto& b) { return a.first.cells < b.first.cells; });
    std::size_t i = 0;
    while (i < keyed.size()) {
        std::size_t j = i;
        while (j < keyed.size() && keyed[j].first.cells == keyed[i].first.cells) ++j;
        if (j - i > 1) {
            Point2 anchor{0, 0};
            int cnt = 0;
            for (const int id : keyed[i].first.cells) {
                if (id == 0) continue;
                const CellStats cs = rpd.cell_stats(id - 1);
                anchor += cs.barycenter.value_or(rpd.sites.positions[id - 1]);
                ++cnt;
            }
            anchor = anchor / std::max(cnt, 1);
            std::stable_sort(keyed.begin() + i, keyed.begin() + j,
                             [&](const auto& a, const auto& b) {
                                 const Point2 pa = grid.representative(a.second);
                                 const Point2 pb = grid.representative(b.second);
                                 const double aa = std::atan2(pa.y - anchor.y, pa.x - anchor.x);
                                 const double ab = std::atan2(pb.y - anchor.y, pb.x - anchor.x);
                                 if (aa != ab) return aa < ab;
                                 if (pa.x != pb.x) return pa.x < pb.x;
                                 return pa.y < pb.y;
                             });
            for (std::size_t k = i; k < j; ++k) keyed[k].first.ordinal = static_cast<int>(k - i);
        }
        i = j;
    }

    out.vertices.reserve(keyed.size());
    for (const auto& [key, gid] : keyed) {
        out.group_to_vertex_[gid] = static_cast<int>(out.vertices.size());
        out.vertices.push_back({grid.representative(gid), key, type_of(key)});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Matching
// ---------------------------------------------------------------------------

struct SplitRecord {
    int side = 0;              // 0: source vertex in A, 1: source in B
    int source = -1;           // index into the source side's classification
    std::vector<int> targets;  // indices into the other side's classification
};

struct UnmatchedRecord {
    int side = 0;
    int index = -1;
    std::string reason;
};

struct Correspondence {
    std::vector<std::pair<int, int>> matched;  // (index in A, index in B)
    std::vector<SplitRecord> splits;
    std::vector<UnmatchedRecord> unmatched;
};

namespace detail {

struct MatchPools {
    // key cells -> vertex indices in ordinal order
    std::map<std::array<int, 3>, std::vector<int>> by_key;
    std::vector<char> consumed;

    explicit MatchPools(const VertexClassification& c) : consumed(c.vertices.size(), 0) {
        for (std::size_t i = 0; i < c.vertices.size(); ++i) {
            by_key[c.vertices[i].key.cells].push_back(static_cast<int>(i));
        }
    }

    int first_unconsumed(const std::array<int, 3>& key) {
        const auto it = by_key.find(key);
        if (it == by_key.end()) return -1;
        for (int idx : it->second) {
            if (!consumed[idx]) return idx;
        }
        return -1;
    }

    int first_any(const std::array<int, 3>& key) const {
        const auto it = by_key.find(key);
        return it == by_key.end() || it->second.empty() ? -1 : it->second.front();
    }
};

}  // namespace detail

/// Pairs vertices with equal keys (triples first, then boundary crossings,
/// then corners; duplicates in ordinal order). A triple key (a,b,c) absent on
/// the other side is resolved against the crossings (0,a,b), (0,a,c), (0,b,c)
/// there, marking a transport discontinuity; crossings degrade to corners the
/// same way. Corner keys with unequal multiplicity attach the surplus to the
/// last partner. Whatever remains lands in `unmatched` with a reason.
inline Correspondence match_vertices(const VertexClassification& a,
                                     const VertexClassification& b) {
    Correspondence corr;
    detail::MatchPools pa(a), pb(b);

    // exact key matches, triple points first
    for (int zeros = 0; zeros <= 2; ++zeros) {
        for (const auto& [key, va] : pa.by_key) {
            VertexKey probe;
            probe.cells = key;
            if (probe.zeros() != zeros) continue;
            const auto itb = pb.by_key.find(key);
            if (itb == pb.by_key.end()) continue;
            const auto& vb = itb->second;
            const std::size_t m = std::min(va.size(), vb.size());
            for (std::size_t k = 0; k < m; ++k) {
                corr.matched.emplace_back(va[k], vb[k]);
                pa.consumed[va[k]] = 1;
                pb.consumed[vb[k]] = 1;
            }
            if (zeros == 2 && m > 0) {
                // corners: every equivalent vertex attaches to the last partner
                for (std::size_t k = m; k < va.size(); ++k) {
                    corr.matched.emplace_back(va[k], vb[m - 1]);
                    pa.consumed[va[k]] = 1;
                }
                for (std::size_t k = m; k < vb.size(); ++k) {
                    corr.matched.emplace_back(va[m - 1], vb[k]);
                    pb.consumed[vb[k]] = 1;
                }
            }
        }
    }

    auto split_pass = [&](int side, const VertexClassification& src, detail::MatchPools& psrc,
                          detail::MatchPools& pdst, int src_zeros) {
        for (std::size_t i = 0; i < src.vertices.size(); ++i) {
            if (psrc.consumed[i]) continue;
            const VertexKey& key = src.vertices[i].key;
            if (key.zeros() != src_zeros) continue;

            std::vector<std::array<int, 3>> reduced;
            if (src_zeros == 0) {
                const auto [x, y, z] = key.cells;
                reduced = {{0, x, y}, {0, x, z}, {0, y, z}};
            } else {
                reduced = {{0, 0, key.cells[1]}, {0, 0, key.cells[2]}};
            }
            std::vector<int> targets;
            for (const auto& rk : reduced) {
                if (src_zeros == 0) {
                    // crossings receive at most one torn vertex each
                    const int t = pdst.first_unconsumed(rk);
                    if (t < 0) continue;
                    pdst.consumed[t] = 1;
                    targets.push_back(t);
                } else {
                    // corners are shared freely, like equal-key corner matches
                    const int t = pdst.first_any(rk);
                    if (t >= 0) targets.push_back(t);
                }
            }
            if (targets.empty()) continue;
            psrc.consumed[i] = 1;
            corr.splits.push_back({side, static_cast<int>(i), std::move(targets)});
        }
    };
    // torn triple points resolve into boundary crossings, then torn
    // crossings into boundary corners
    split_pass(0, a, pa, pb, 0);
    split_pass(1, b, pb, pa, 0);
    split_pass(0, a, pa, pb, 1);
    split_pass(1, b, pb, pa, 1);

    for (std::size_t i = 0; i < a.vertices.size(); ++i) {
        if (!pa.consumed[i])
            corr.unmatched.push_back({0, static_cast<int>(i), "no partner key in other diagram"});
    }
    for (std::size_t i = 0; i < b.vertices.size(); ++i) {
        if (!pb.consumed[i])
            corr.unmatched.push_back({1, static_cast<int>(i), "no partner key in other diagram"});
    }
    return corr;
}

// ---------------------------------------------------------------------------
// Cell outlines
// ---------------------------------------------------------------------------

struct OutlineVertex {
    Point2 pos;
    int classified = -1;    // index into the diagram's classification
    int next_neighbor = -2; // cell across the edge leaving this vertex; -1 = outside
};

struct CellOutline {
    int site = -1;
    std::vector<std::vector<OutlineVertex>> loops;  // outer loops ccw, holes cw
};

/// Boundary loops of each cell: piece edges along interior mesh edges cancel
/// pairwise, the rest chain into loops whose artifact vertices (interior
/// crossings) are dropped, leaving only classified vertices in cyclic order.
inline std::vector<CellOutline> build_cell_outlines(const RestrictedPowerDiagram& rpd,
                                                    const VertexClassification& cls) {
    const double eps = cls.weld_eps > 0 ? cls.weld_eps : 1e-9;
    std::vector<CellOutline> outlines;
    outlines.reserve(rpd.cells.size());

    for (const RestrictedCell& cell : rpd.cells) {
        CellOutline outline;
        outline.site = cell.site;

        detail::WeldGrid nodes(eps);
        struct Edge {
            int from, to;
            LineRef line;
        };
        std::vector<Edge> edges;
        std::map<std::pair<int, int>, int> net;  // (lo, hi) -> signed multiplicity
        for (const RpdPiece& piece : cell.pieces) {
            const auto& verts = piece.poly.v;
            const std::size_t m = verts.size();
            for (std::size_t k = 0; k < m; ++k) {
                const int u = nodes.find_or_insert(verts[k].p);
                const int v = nodes.find_or_insert(verts[(k + 1) % m].p);
                if (u == v) continue;
                edges.push_back({u, v, verts[k].line});
                net[{std::min(u, v), std::max(u, v)}] += (u < v) ? 1 : -1;
            }
        }

        std::map<int, std::vector<std::pair<int, LineRef>>> succ;  // from -> (to, line)
        for (const Edge& e : edges) {
            auto& n = net[{std::min(e.from, e.to), std::max(e.from, e.to)}];
            const int want = (e.from < e.to) ? 1 : -1;
            if (n == 0 || (n > 0) != (want > 0)) continue;  // cancelled by the twin edge
            n -= want;
            succ[e.from].emplace_back(e.to, e.line);
        }
        for (auto& [from, outs] : succ) {
            std::sort(outs.begin(), outs.end());
        }

        while (!succ.empty()) {
            const int start = succ.begin()->first;
            std::vector<std::pair<int, LineRef>> loop;  // (node, line of edge leaving it)
            int at = start;
            while (true) {
                auto it = succ.find(at);
                if (it == succ.end() || it->second.empty()) break;
                const auto [to, line] = it->second.front();
                it->second.erase(it->second.begin());
                if (it->second.empty()) succ.erase(it);
                loop.emplace_back(at, line);
                at = to;
                if (at == start) break;
            }
            if (loop.size() < 3) continue;

            std::vector<OutlineVertex> simplified;
            for (std::size_t k = 0; k < loop.size(); ++k) {
                const Point2 pos = nodes.representative(loop[k].first);
                const int ci = cls.find(pos);
                if (ci < 0 || !cls.vertices[ci].key.contains(cell.site + 1)) continue;
                OutlineVertex ov;
                ov.pos = pos;
                ov.classified = ci;
                ov.next_neighbor =
                    is_bisector_line(loop[k].second) ? bisector_site(loop[k].second) : -1;
                simplified.push_back(ov);
            }
            if (simplified.size() < 2) {
                // no classified vertices to carry the loop; keep raw geometry
                if (simplified.empty()) {
                    for (const auto& [node, line] : loop) {
                        OutlineVertex ov;
                        ov.pos = nodes.representative(node);
                        ov.next_neighbor = is_bisector_line(line) ? bisector_site(line) : -1;
                        simplified.push_back(ov);
                    }
                } else {
                    continue;
                }
            }
            // canonical start: lexicographically smallest position
            std::size_t best = 0;
            for (std::size_t k = 1; k < simplified.size(); ++k) {
                const Point2 &p = simplified[k].pos, &q = simplified[best].pos;
                if (p.x < q.x || (p.x == q.x && p.y < q.y)) best = k;
            }
            std::rotate(simplified.begin(), simplified.begin() + best, simplified.end());
            outline.loops.push_back(std::move(simplified));
        }

        std::sort(outline.loops.begin(), outline.loops.end(),
                  [](const auto& a, const auto& b) {
                      if (a.front().pos.x != b.front().pos.x) return a.front().pos.x < b.front().pos.x;
                      return a.front().pos.y < b.front().pos.y;
                  });
        outlines.push_back(std::move(outline));
    }
    return outlines;
}

// ---------------------------------------------------------------------------
// Frames
// ---------------------------------------------------------------------------

struct FrameVertex {
    Point2 pos;
    VertexKey key;      // key of the source vertex in diagram A (if any)
    bool matched = true;
};

struct MorphFrame {
    double t = 0.0;
    struct Cell {
        int site = -1;
        double area = 0.0;
        double density = 0.0;  // target mass / area at this t
        std::vector<std::vector<FrameVertex>> polygons;
    };
    std::vector<Cell> cells;
    int split_vertex_count = 0;
};

/// Everything needed to emit frames for any t: classifications of both
/// diagrams, their correspondence, and A's cell outlines.
struct MorphContext {
    const RestrictedPowerDiagram* rpd_a = nullptr;
    const RestrictedPowerDiagram* rpd_b = nullptr;
    VertexClassification class_a, class_b;
    Correspondence corr;
    std::vector<CellOutline> outlines_a;
    std::vector<std::vector<int>> partners;  // per A vertex: B target indices
};

inline MorphContext make_morph(const RestrictedPowerDiagram& a,
                               const RestrictedPowerDiagram& b) {
    if (a.site_count() != b.site_count())
        throw Error("make_morph: diagrams carry different sample counts");
    MorphContext ctx;
    ctx.rpd_a = &a;
    ctx.rpd_b = &b;
    ctx.class_a = classify_vertices(a);
    ctx.class_b = classify_vertices(b);
    ctx.corr = match_vertices(ctx.class_a, ctx.class_b);
    ctx.outlines_a = build_cell_outlines(a, ctx.class_a);

    ctx.partners.assign(ctx.class_a.vertices.size(), {});
    for (const auto& [ia, ib] : ctx.corr.matched) ctx.partners[ia].push_back(ib);
    for (const SplitRecord& s : ctx.corr.splits) {
        if (s.side == 0) {
            for (int t : s.targets) ctx.partners[s.source].push_back(t);
        } else {
            for (int t : s.targets) ctx.partners[t].push_back(s.source);
        }
    }
    return ctx;
}

namespace detail {

inline Point2 lerp_exact(const Point2& p, const Point2& q, double t) {
    if (t == 0.0) return p;
    if (t == 1.0) return q;
    return p * (1.0 - t) + q * t;
}

}  // namespace detail

/// The frame at t: matched vertices at (1-t) a + t b (endpoints bit-exact),
/// split vertices duplicated per receiving cell so the cell tears open, and
/// unmatched vertices held at their source position. Cells keep their cyclic
/// vertex order from diagram A; the density annotation is target mass over
/// interpolated area.
inline MorphFrame interpolate_frame(const MorphContext& ctx, double t) {
    if (!(t >= 0.0 && t <= 1.0)) throw Error("interpolate_frame: t outside [0, 1]");
    const auto& cls_a = ctx.class_a.vertices;
    const auto& cls_b = ctx.class_b.vertices;

    MorphFrame frame;
    frame.t = t;
    frame.split_vertex_count = static_cast<int>(ctx.corr.splits.size());
    const double p_mass = ctx.rpd_a->sites.target_mass;
    const double q_mass = ctx.rpd_b->sites.target_mass;

    for (const CellOutline& outline : ctx.outlines_a) {
        MorphFrame::Cell cell;
        cell.site = outline.site;
        const int self = outline.site + 1;

        for (const auto& loop : outline.loops) {
            std::vector<FrameVertex> poly;
            const std::size_t m = loop.size();
            for (std::size_t k = 0; k < m; ++k) {
                const OutlineVertex& ov = loop[k];
                FrameVertex fv;
                fv.key = ov.classified >= 0 ? cls_a[ov.classified].key : VertexKey{};
                if (ov.classified < 0 || ctx.partners[ov.classified].empty()) {
                    fv.pos = ov.pos;  // unmatched: held in place
                    fv.matched = false;
                    poly.push_back(fv);
                    continue;
                }
                const auto& targets = ctx.partners[ov.classified];
                std::vector<int> mine;
                for (int tb : targets) {
                    if (cls_b[tb].key.contains(self)) mine.push_back(tb);
                }
                if (mine.empty()) mine.push_back(targets.front());
                if (mine.size() > 1) {
                    // torn vertex: one copy per side, entering copy first;
                    // each follows the target sharing its flank's neighbor
                    const int prev_nb = loop[(k + m - 1) % m].next_neighbor;
                    const int next_nb = ov.next_neighbor;
                    auto pick = [&](int neighbor) {
                        for (int tb : mine) {
                            if (cls_b[tb].key.contains(neighbor + 1)) return tb;
                        }
                        return -1;
                    };
                    int in_copy = pick(prev_nb);
                    int out_copy = pick(next_nb);
                    if (in_copy < 0) in_copy = mine[0];
                    if (out_copy < 0) out_copy = (in_copy == mine[0] && mine.size() > 1)
                                                     ? mine[1]
                                                     : mine[0];
                    fv.pos = detail::lerp_exact(ov.pos, cls_b[in_copy].pos, t);
                    poly.push_back(fv);
                    if (out_copy != in_copy) {
                        fv.pos = detail::lerp_exact(ov.pos, cls_b[out_copy].pos, t);
                        poly.push_back(fv);
                    }
                } else {
                    fv.pos = detail::lerp_exact(ov.pos, cls_b[mine[0]].pos, t);
                    poly.push_back(fv);
                }
            }
            if (poly.size() >= 3) cell.polygons.push_back(std::move(poly));
        }

        double area = 0.0;
        for (const auto& poly : cell.polygons) {
            for (std::size_t k = 0; k < poly.size(); ++k) {
                area += poly[k].pos.cross(poly[(k + 1) % poly.size()].pos);
            }
        }
        cell.area = 0.5 * area;
        const double mass = (1.0 - t) * p_mass + t * q_mass;
        cell.density = cell.area > kEpsGeom ? mass / cell.area : 0.0;
        frame.cells.push_back(std::move(cell));
    }
    return frame;
}

/// Fraction of adjacent cell pairs of `a` that are also adjacent in `b`
/// (1.0 when `a` has no adjacencies).
inline double adjacency_preservation(const RestrictedPowerDiagram& a,
                                     const RestrictedPowerDiagram& b) {
    if (a.adjacency.empty()) return 1.0;
    std::size_t kept = 0;
    for (const auto& pr : a.adjacency) {
        if (std::binary_search(b.adjacency.begin(), b.adjacency.end(), pr)) ++kept;
    }
    return static_cast<double>(kept) / a.adjacency.size();
}

struct MatchStatistics {
    int triples_a = 0;
    int triples_exact = 0;   // A triple points matched by exact key
    int splits = 0;
    int unmatched = 0;
};

inline MatchStatistics match_statistics(const MorphContext& ctx) {
    MatchStatistics st;
    st.splits = static_cast<int>(ctx.corr.splits.size());
    st.unmatched = static_cast<int>(ctx.corr.unmatched.size());
    for (const auto& v : ctx.class_a.vertices) {
        if (v.vtype == VertexType::kTriplePoint) ++st.triples_a;
    }
    for (const auto& [ia, ib] : ctx.corr.matched) {
        if (ctx.class_a.vertices[ia].vtype == VertexType::kTriplePoint &&
            ctx.class_a.vertices[ia].key == ctx.class_b.vertices[ib].key) {
            ++st.triples_exact;
        }
    }
    return st;
}

// ---------------------------------------------------------------------------
// SVG export
// ---------------------------------------------------------------------------

struct SvgStyle {
    double width_px = 640.0;
    double margin_px = 16.0;
    double stroke_width_px = 1.0;
    // grayscale fill: density_min maps to white, density_max to near-black;
    // NaN bounds are replaced by the frame's own range
    double density_min = std::numeric_limits<double>::quiet_NaN();
    double density_max = std::numeric_limits<double>::quiet_NaN();
    std::string metadata;  // embedded verbatim inside <metadata> when nonempty
};

namespace detail {

inline void svg_num(std::string& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    out += buf;
}

}  // namespace detail

/// One deterministic SVG document per frame; each cell is a filled path (all
/// of its loops in one path, even-odd fill) shaded by its density annotation.
inline std::string frame_to_svg(const MorphFrame& frame, const SvgStyle& style = {}) {
    double xmin = std::numeric_limits<double>::infinity(), ymin = xmin;
    double xmax = -xmin, ymax = -xmin;
    double dmin = xmin, dmax = -xmin;
    for (const auto& cell : frame.cells) {
        if (cell.polygons.empty()) continue;
        dmin = std::min(dmin, cell.density);
        dmax = std::max(dmax, cell.density);
        for (const auto& poly : cell.polygons) {
            for (const auto& v : poly) {
                xmin = std::min(xmin, v.pos.x);
                xmax = std::max(xmax, v.pos.x);
                ymin = std::min(ymin, v.pos.y);
                ymax = std::max(ymax, v.pos.y);
            }
        }
    }
    if (!(xmin <= xmax)) { xmin = ymin = 0.0; xmax = ymax = 1.0; }
    if (!std::isnan(style.density_min)) dmin = style.density_min;
    if (!std::isnan(style.density_max)) dmax = style.density_max;
    if (!(dmin < dmax)) { dmin -= 0.5; dmax += 0.5; }

    const double span_x = std::max(xmax - xmin, 1e-12);
    const double span_y = std::max(ymax - ymin, 1e-12);
    const double scale = (style.width_px - 2.0 * style.margin_px) / span_x;
    const double height_px = span_y * scale + 2.0 * style.margin_px;
    // y is flipped so the domain renders upright
    auto px = [&](const Point2& p) {
        return Point2{style.margin_px + (p.x - xmin) * scale,
                      style.margin_px + (ymax - p.y) * scale};
    };

    std::string out;
    out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"";
    detail::svg_num(out, style.width_px);
    out += "\" height=\"";
    detail::svg_num(out, height_px);
    out += "\" viewBox=\"0 0 ";
    detail::svg_num(out, style.width_px);
    out += " ";
    detail::svg_num(out, height_px);
    out += "\">\n";
    if (!style.metadata.empty()) {
        out += "<metadata>" + style.metadata + "</metadata>\n";
    }

    for (const auto& cell : frame.cells) {
        if (cell.polygons.empty()) continue;
        const double u = std::clamp((cell.density - dmin) / (dmax - dmin), 0.0, 1.0);
        const int gray = static_cast<int>(std::lround(235.0 * (1.0 - u)));
        out += "<path fill-rule=\"evenodd\" fill=\"rgb(";
        out += std::to_string(gray) + "," + std::to_string(gray) + "," + std::to_string(gray);
        out += ")\" stroke=\"black\" stroke-width=\"";
        detail::svg_num(out, style.stroke_width_px);
        out += "\" d=\"";
        for (const auto& poly : cell.polygons) {
            for (std::size_t k = 0; k < poly.size(); ++k) {
                const Point2 p = px(poly[k].pos);
                out += (k == 0) ? "M" : "L";
                detail::svg_num(out, p.x);
                out += " ";
                detail::svg_num(out, p.y);
            }
            out += "Z";
        }
        out += "\"/>\n";
    }
    out += "</svg>\n";
    return out;
}

}  // namespace symot
