// Quantitative evaluation: approximate symmetric Hausdorff distance between
// interpolated shapes via area sampling and nearest-neighbor queries, plus the
// benchmark harness comparing the coupled morph against the one-sided
// baseline at a set of interpolation times.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "symot/morph.hpp"
#include "symot/rng.hpp"
#include "symot/symmetrizer.hpp"

namespace symot {

// ---------------------------------------------------------------------------
// Nearest neighbors
// ---------------------------------------------------------------------------

/// 2-d kd-tree over a fixed point set; median split, branch-and-bound query.
class KdTree2 {
public:
    explicit KdTree2(std::vector<Point2> points) : pts_(std::move(points)) {
        if (pts_.empty()) throw Error("KdTree2: empty point set");
        order_.resize(pts_.size());
        for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = static_cast<int>(i);
        build(0, static_cast<int>(pts_.size()), 0);
    }

    double nearest_dist2(const Point2& q) const {
        double best = std::numeric_limits<double>::infinity();
        search(q, 0, static_cast<int>(pts_.size()), 0, best);
        return best;
    }

private:
    void build(int lo, int hi, int axis) {
        if (hi - lo <= 1) return;
        const int mid = (lo + hi) / 2;
        std::nth_element(order_.begin() + lo, order_.begin() + mid, order_.begin() + hi,
                         [&](int a, int b) {
                             return axis == 0 ? pts_[a].x < pts_[b].x : pts_[a].y < pts_[b].y;
                         });
        build(lo, mid, 1 - axis);
        build(mid + 1, hi, 1 - axis);
    }

    void search(const Point2& q, int lo, int hi, int axis, double& best) const {
        if (lo >= hi) return;
        const int mid = (lo + hi) / 2;
        const Point2& p = pts_[order_[mid]];
        best = std::min(best, dist2(q, p));
        const double delta = axis == 0 ? q.x - p.x : q.y - p.y;
        const int near_lo = delta < 0 ? lo : mid + 1;
        const int near_hi = delta < 0 ? mid : hi;
        const int far_lo = delta < 0 ? mid + 1 : lo;
        const int far_hi = delta < 0 ? hi : mid;
        search(q, near_lo, near_hi, 1 - axis, best);
        if (delta * delta < best) search(q, far_lo, far_hi, 1 - axis, best);
    }

    std::vector<Point2> pts_;
    std::vector<int> order_;
};

// ---------------------------------------------------------------------------
// Area sampling of frames
// ---------------------------------------------------------------------------

namespace detail {

/// Ear-clipping triangulation of a simple polygon (either orientation).
/// Degenerate corners are removed without emitting; if no ear can be found
/// (self-intersecting mid-morph geometry) the remainder is fanned.
inline std::vector<std::array<Point2, 3>> triangulate_loop(std::vector<Point2> poly) {
    std::vector<std::array<Point2, 3>> out;
    double signed_area = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        signed_area += poly[i].cross(poly[(i + 1) % poly.size()]);
    }
    if (signed_area < 0.0) std::reverse(poly.begin(), poly.end());

    // reflex vertices on the candidate ear's boundary must block it too,
    // or the clip can leak across a notch whose corner sits on the chord
    auto inside_closed = [](const Point2& a, const Point2& b, const Point2& c, const Point2& p) {
        return (b - a).cross(p - a) >= -kEpsGeom && (c - b).cross(p - b) >= -kEpsGeom &&
               (a - c).cross(p - c) >= -kEpsGeom;
    };

    std::vector<int> idx(poly.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
    while (idx.size() > 3) {
        const std::size_t m = idx.size();
        std::vector<char> reflex(m, 0);
        for (std::size_t k = 0; k < m; ++k) {
            const Point2& a = poly[idx[(k + m - 1) % m]];
            const Point2& b = poly[idx[k]];
            const Point2& c = poly[idx[(k + 1) % m]];
            reflex[k] = (b - a).cross(c - b) < 0.0;
        }
        bool clipped = false;
        for (std::size_t k = 0; k < m; ++k) {
            if (reflex[k]) continue;
            const Point2& a = poly[idx[(k + m - 1) % m]];
            const Point2& b = poly[idx[k]];
            const Point2& c = poly[idx[(k + 1) % m]];
            const double cr = (b - a).cross(c - a);
            if (cr <= kEpsGeom) {  // collinear / duplicate corner: drop silently
                idx.erase(idx.begin() + k);
                clipped = true;
                break;
            }
            bool blocked = false;
            for (std::size_t j = 0; j < m && !blocked; ++j) {
                if (!reflex[j]) continue;
                const Point2& p = poly[idx[j]];
                if (p == a || p == b || p == c) continue;
                blocked = inside_closed(a, b, c, p);
            }
            if (blocked) continue;
            out.push_back({a, b, c});
            idx.erase(idx.begin() + k);
            clipped = true;
            break;
        }
        if (!clipped) break;  // self-intersecting; fan the remainder
    }
    if (idx.size() == 3) {
        out.push_back({poly[idx[0]], poly[idx[1]], poly[idx[2]]});
    } else if (idx.size() > 3) {
        for (std::size_t k = 1; k + 1 < idx.size(); ++k) {
            out.push_back({poly[idx[0]], poly[idx[k]], poly[idx[k + 1]]});
        }
    }
    return out;
}

}  // namespace detail

struct ShapeSampling {
    std::vector<Point2> points;
    std::string source;
};

/// Uniform area sampling of a frame's cells. Hole loops (clockwise) are
/// skipped; transiently self-intersecting cells are sampled through their
/// fan triangles, an accepted approximation mid-morph.
inline ShapeSampling sample_frame(const MorphFrame& frame, int count, std::uint64_t seed) {
    if (count < 1) throw Error("sample_frame: count must be >= 1");
    std::vector<std::array<Point2, 3>> tris;
    for (const auto& cell : frame.cells) {
        for (const auto& poly : cell.polygons) {
            double a = 0.0;
            std::vector<Point2> pts;
            pts.reserve(poly.size());
            for (const auto& v : poly) pts.push_back(v.pos);
            for (std::size_t k = 0; k < pts.size(); ++k) {
                a += pts[k].cross(pts[(k + 1) % pts.size()]);
            }
            if (a <= 0.0) continue;
            const auto t = detail::triangulate_loop(std::move(pts));
            tris.insert(tris.end(), t.begin(), t.end());
        }
    }
    if (tris.empty()) throw Error("sample_frame: frame has no area to sample");

    std::vector<double> cdf(tris.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < tris.size(); ++i) {
        acc += 0.5 * std::abs((tris[i][1] - tris[i][0]).cross(tris[i][2] - tris[i][0]));
        cdf[i] = acc;
    }

    Rng rng(seed);
    ShapeSampling out;
    out.points.reserve(count);
    for (int i = 0; i < count; ++i) {
        const double r = rng.uniform01() * acc;
        const std::size_t k = std::min<std::size_t>(
            tris.size() - 1, std::lower_bound(cdf.begin(), cdf.end(), r) - cdf.begin());
        const double su = std::sqrt(rng.uniform01());
        const double v = rng.uniform01();
        out.points.push_back(tris[k][0] * (1.0 - su) + tris[k][1] * (su * (1.0 - v)) +
                             tris[k][2] * (su * v));
    }
    return out;
}

/// Symmetric Hausdorff distance between two frames, approximated from
/// `samples_per_shape` area samples per side (converges from below as the
/// sample count grows). Both shapes use the same derived sub-seed, so a frame
/// compared against itself gives exactly zero.
inline double hausdorff(const MorphFrame& a, const MorphFrame& b, int samples_per_shape,
                        std::uint64_t seed) {
    if (samples_per_shape < 100) throw Error("hausdorff: need at least 100 samples per shape");
    const std::uint64_t sub = derive_seed(seed, stream::kShapeSampling);
    const ShapeSampling sa = sample_frame(a, samples_per_shape, sub);
    const ShapeSampling sb = sample_frame(b, samples_per_shape, sub);
    const KdTree2 ta(sa.points);
    const KdTree2 tb(sb.points);
    double worst = 0.0;
    for (const Point2& p : sa.points) worst = std::max(worst, tb.nearest_dist2(p));
    for (const Point2& p : sb.points) worst = std::max(worst, ta.nearest_dist2(p));
    return std::sqrt(worst);
}

// ---------------------------------------------------------------------------
// One-sided baseline morph
// ---------------------------------------------------------------------------

/// The non-symmetric reference: sample nu, solve a single transport from mu
/// to the samples, then translate each cell rigidly from its barycenter
/// toward its sample as t advances.
struct BaselineMorph {
    RestrictedPowerDiagram rpd;     // cells on Sp(mu)
    std::vector<Vec2> displacement; // site - cell barycenter
};

inline BaselineMorph make_baseline(const DensityMesh& mu, const DensityMesh& nu, int n,
                                   std::uint64_t seed, const SolveOptions& solver = {}) {
    BaselineMorph bm;
    SiteSet sites = sample_sites(nu, n, seed);
    sites.target_mass = mu.total_mass() / n;
    const std::vector<double> targets(n, mu.total_mass() / n);
    SolveResult res = solve_weights(mu, sites, targets, WeightVector(n, 0.0), solver);
    if (!res.report.converged)
        throw Error("baseline: transport solve did not converge (gradient " +
                    std::to_string(res.report.final_gradient_norm) + ")");
    bm.rpd = std::move(res.rpd);
    bm.displacement.resize(n);
    for (int i = 0; i < n; ++i) {
        const CellStats cs = bm.rpd.cell_stats(i);
        bm.displacement[i] = bm.rpd.sites.positions[i] - *cs.barycenter;
    }
    return bm;
}

inline MorphFrame baseline_frame(const BaselineMorph& bm, double t) {
    if (!(t >= 0.0 && t <= 1.0)) throw Error("baseline_frame: t outside [0, 1]");
    MorphFrame frame;
    frame.t = t;
    for (const RestrictedCell& cell : bm.rpd.cells) {
        MorphFrame::Cell fc;
        fc.site = cell.site;
        const Vec2 shift = bm.displacement[cell.site] * t;
        double area = 0.0;
        for (const RpdPiece& piece : cell.pieces) {
            std::vector<FrameVertex> poly;
            poly.reserve(piece.poly.size());
            for (const auto& v : piece.poly.v) {
                FrameVertex fv;
                fv.pos = v.p + shift;
                poly.push_back(fv);
            }
            area += piece.poly.area();
            fc.polygons.push_back(std::move(poly));
        }
        fc.area = area;
        fc.density = area > kEpsGeom ? bm.rpd.sites.target_mass / area : 0.0;
        frame.cells.push_back(std::move(fc));
    }
    return frame;
}

// ---------------------------------------------------------------------------
// Benchmark
// ---------------------------------------------------------------------------

struct BenchScenario {
    std::string name;
    DensityMesh mu;
    DensityMesh nu;
    int n = 200;
    int n_ref = 5000;
    std::vector<double> t_grid{0.0, 0.25, 0.5, 0.75, 1.0};
    std::vector<std::uint64_t> seeds{1, 2, 3};
    int outer_iters = 100;
    int samples_per_shape = 10000;
    std::uint64_t truth_seed = 9001;  // ground truth is shared across seeds
};

struct BenchRow {
    std::string scenario;
    std::uint64_t seed = 0;
    std::vector<double> t_grid;
    std::vector<double> ours;      // Hausdorff to ground truth, per t
    std::vector<double> baseline;  // same for the one-sided baseline
    int wins = 0;                  // #t where ours < baseline
    double adjacency_preserved = 0.0;
    double triple_exact_fraction = 1.0;
    int split_records = 0;
    std::string error;  // nonempty when the scenario run failed
};

struct BenchReport {
    std::vector<BenchRow> rows;
};

inline BenchReport run_benchmark(const std::vector<BenchScenario>& scenarios,
                                 const SolveOptions& solver = {}) {
    BenchReport report;
    for (const BenchScenario& sc : scenarios) {
        std::vector<MorphFrame> truth;
        std::string truth_error;
        try {
            const BaselineMorph ref = make_baseline(
                sc.mu, sc.nu, sc.n_ref, derive_seed(sc.truth_seed, stream::kBenchTruth), solver);
            for (const double t : sc.t_grid) truth.push_back(baseline_frame(ref, t));
        } catch (const std::exception& e) {
            truth_error = e.what();
        }

        for (const std::uint64_t seed : sc.seeds) {
            BenchRow row;
            row.scenario = sc.name;
            row.seed = seed;
            row.t_grid = sc.t_grid;
            if (!truth_error.empty()) {
                row.error = "ground truth failed: " + truth_error;
                report.rows.push_back(std::move(row));
                continue;
            }
            try {
                CouplingOptions copts;
                copts.solver = solver;
                const RunResult ours = run_coupling(sc.mu, sc.nu, sc.n, sc.outer_iters,
                                                    derive_seed(seed, stream::kBenchOurs), copts);
                const MorphContext ctx = make_morph(ours.state.rpd_mu, ours.state.rpd_nu);
                const BaselineMorph base = make_baseline(
                    sc.mu, sc.nu, sc.n, derive_seed(seed, stream::kBenchBaseline), solver);

                row.adjacency_preserved =
                    adjacency_preservation(ours.state.rpd_mu, ours.state.rpd_nu);
                const MatchStatistics ms = match_statistics(ctx);
                row.triple_exact_fraction =
                    ms.triples_a > 0 ? static_cast<double>(ms.triples_exact) / ms.triples_a : 1.0;
                row.split_records = ms.splits;

                for (std::size_t k = 0; k < sc.t_grid.size(); ++k) {
                    const double t = sc.t_grid[k];
                    const std::uint64_t hs = derive_seed(seed, 100 + k);
                    row.ours.push_back(
                        hausdorff(interpolate_frame(ctx, t), truth[k], sc.samples_per_shape, hs));
                    row.baseline.push_back(
                        hausdorff(baseline_frame(base, t), truth[k], sc.samples_per_shape, hs));
                    if (row.ours.back() < row.baseline.back()) ++row.wins;
                }
            } catch (const std::exception& e) {
                row.error = e.what();
            }
            report.rows.push_back(std::move(row));
        }
    }
    return report;
}

inline std::string bench_to_csv(const BenchReport& report) {
    std::string out = "scenario,seed,method";
    std::size_t maxt = 0;
    for (const auto& r : report.rows) maxt = std::max(maxt, r.t_grid.size());
    for (std::size_t k = 0; k < maxt; ++k) out += ",t" + std::to_string(k);
    out += ",wins,adjacency_preserved,triple_exact_fraction,split_records,error\n";
    char buf[64];
    auto emit = [&](const BenchRow& r, const char* method, const std::vector<double>& vals) {
        out += r.scenario + "," + std::to_string(r.seed) + "," + method;
        for (std::size_t k = 0; k < maxt; ++k) {
            out += ",";
            if (k < vals.size()) {
                std::snprintf(buf, sizeof(buf), "%.6g", vals[k]);
                out += buf;
            }
        }
        std::snprintf(buf, sizeof(buf), ",%d,%.4f,%.4f,%d,", r.wins, r.adjacency_preserved,
                      r.triple_exact_fraction, r.split_records);
        out += buf;
        out += r.error + "\n";
    };
    for (const auto& r : report.rows) {
        emit(r, "coupled", r.ours);
        emit(r, "baseline", r.baseline);
    }
    return out;
}

/// Fixed-width table, one scenario/seed block per pair of rows.
inline std::string bench_to_table(const BenchReport& report) {
    std::string out;
    char buf[160];
    out += "distances to the dense one-sided reference, per interpolation time\n";
    for (const auto& r : report.rows) {
        if (!r.error.empty()) {
            std::snprintf(buf, sizeof(buf), "%-28s seed %llu  ERROR: %s\n", r.scenario.c_str(),
                          static_cast<unsigned long long>(r.seed), r.error.c_str());
            out += buf;
            continue;
        }
        auto line = [&](const char* method, const std::vector<double>& vals) {
            std::snprintf(buf, sizeof(buf), "%-28s seed %llu  %-8s", r.scenario.c_str(),
                          static_cast<unsigned long long>(r.seed), method);
            out += buf;
            for (const double v : vals) {
                std::snprintf(buf, sizeof(buf), " %9.5f", v);
                out += buf;
            }
            out += "\n";
        };
        line("coupled", r.ours);
        line("baseline", r.baseline);
        std::snprintf(buf, sizeof(buf),
                      "%-28s seed %llu  wins %d/%zu, adjacency kept %.3f, exact triples %.3f, "
                      "splits %d\n",
                      r.scenario.c_str(), static_cast<unsigned long long>(r.seed), r.wins,
                      r.t_grid.size(), r.adjacency_preserved, r.triple_exact_fraction,
                      r.split_records);
        out += buf;
    }
    return out;
}

}  // namespace symot
