#include <gtest/gtest.h>

#include <set>

#include "symot/morph.hpp"
#include "symot/shapes.hpp"
#include "symot/symmetrizer.hpp"

using namespace symot;

namespace {

SiteSet sites_at(std::vector<Point2> pts, double total_mass = 1.0) {
    SiteSet s;
    s.target_mass = total_mass / pts.size();
    s.positions = std::move(pts);
    return s;
}

int count_type(const VertexClassification& c, VertexType t) {
    int n = 0;
    for (const auto& v : c.vertices) n += (v.vtype == t) ? 1 : 0;
    return n;
}

std::vector<ClassifiedVertex> with_key(const VertexClassification& c, int a, int b, int d) {
    std::vector<ClassifiedVertex> out;
    for (const auto& v : c.vertices) {
        if (v.key.cells == VertexKey::of(a, b, d).cells) out.push_back(v);
    }
    return out;
}

// hand-built classification lists for exercising the matcher directly
VertexClassification synthetic(const std::vector<ClassifiedVertex>& verts) {
    VertexClassification c;
    c.vertices = verts;
    c.weld_eps = 1e-9;
    return c;
}

ClassifiedVertex cv(double x, double y, int a, int b, int d, int ordinal = 0) {
    ClassifiedVertex v;
    v.pos = {x, y};
    v.key = VertexKey::of(a, b, d, ordinal);
    v.vtype = type_of(v.key);
    return v;
}

}  // namespace

TEST(Classify, TwoSiteSplitSquare) {
    const DensityMesh mesh = make_unit_square_mesh(1);
    const auto rpd = build_rpd(mesh, sites_at({{0.25, 0.5}, {0.75, 0.5}}), {0.0, 0.0});
    const VertexClassification cls = classify_vertices(rpd);

    EXPECT_EQ(count_type(cls, VertexType::kDomainCorner), 4);
    EXPECT_EQ(count_type(cls, VertexType::kBoundaryCrossing), 2);
    EXPECT_EQ(count_type(cls, VertexType::kTriplePoint), 0);

    EXPECT_EQ(with_key(cls, 0, 0, 1).size(), 2u);  // square corners owned by cell 1
    EXPECT_EQ(with_key(cls, 0, 0, 2).size(), 2u);
    const auto crossings = with_key(cls, 0, 1, 2);
    ASSERT_EQ(crossings.size(), 2u);
    EXPECT_NE(crossings[0].key.ordinal, crossings[1].key.ordinal);
    for (const auto& v : crossings) {
        EXPECT_NEAR(v.pos.x, 0.5, 1e-12);
        EXPECT_TRUE(std::abs(v.pos.y - 0.0) < 1e-12 || std::abs(v.pos.y - 1.0) < 1e-12);
    }
}

TEST(Classify, SingleCellSquareHasFourCorners) {
    const DensityMesh mesh = make_unit_square_mesh(1);
    const auto rpd = build_rpd(mesh, sites_at({{0.4, 0.6}}), {0.0});
    const VertexClassification cls = classify_vertices(rpd);
    ASSERT_EQ(cls.vertices.size(), 4u);
    std::set<int> ordinals;
    for (const auto& v : cls.vertices) {
        EXPECT_EQ(v.vtype, VertexType::kDomainCorner);
        EXPECT_EQ(v.key.cells, (std::array<int, 3>{0, 0, 1}));
        ordinals.insert(v.key.ordinal);
    }
    EXPECT_EQ(ordinals, (std::set<int>{0, 1, 2, 3}));
}

TEST(Classify, InteriorTriplePoint) {
    const DensityMesh mesh = make_unit_square_mesh(1);
    const auto rpd = build_rpd(
        mesh, sites_at({{0.5, 0.8}, {0.2, 0.2}, {0.8, 0.2}}), {0.0, 0.0, 0.0});
    const VertexClassification cls = classify_vertices(rpd);
    const auto triples = with_key(cls, 1, 2, 3);
    ASSERT_EQ(triples.size(), 1u);
    EXPECT_EQ(triples[0].vtype, VertexType::kTriplePoint);
    // equidistant point of the three sites
    const Point2 p = triples[0].pos;
    EXPECT_NEAR(dist(p, {0.5, 0.8}), dist(p, {0.2, 0.2}), 1e-9);
    EXPECT_NEAR(dist(p, {0.5, 0.8}), dist(p, {0.8, 0.2}), 1e-9);
}

TEST(Classify, InteriorMeshVerticesAreNotEmitted) {
    // finer mesh: its interior grid vertices must not appear as match points
    const DensityMesh mesh = make_unit_square_mesh(4);
    const auto rpd = build_rpd(mesh, sites_at({{0.3, 0.52}, {0.7, 0.48}}), {0.0, 0.0});
    const VertexClassification cls = classify_vertices(rpd);
    for (const auto& v : cls.vertices) {
        const bool on_boundary = std::abs(v.pos.x) < 1e-9 || std::abs(v.pos.x - 1) < 1e-9 ||
                                 std::abs(v.pos.y) < 1e-9 || std::abs(v.pos.y - 1) < 1e-9;
        EXPECT_TRUE(on_boundary) << "interior vertex leaked at (" << v.pos.x << ", " << v.pos.y
                                 << ")";
        EXPECT_TRUE(v.key.valid());
    }
}

TEST(Classify, KeysSatisfyTheirInvariants) {
    const DensityMesh mesh = make_disk_mesh({0.5, 0.5}, 0.45, 4);
    const SiteSet sites = sample_sites(mesh, 20, 3);
    const auto rpd = build_rpd(mesh, sites, WeightVector(20, 0.0));
    const VertexClassification cls = classify_vertices(rpd);
    EXPECT_GT(cls.vertices.size(), 0u);
    for (const auto& v : cls.vertices) {
        EXPECT_TRUE(v.key.valid());
        switch (v.vtype) {
            case VertexType::kTriplePoint: EXPECT_EQ(v.key.zeros(), 0); break;
            case VertexType::kBoundaryCrossing: EXPECT_EQ(v.key.zeros(), 1); break;
            case VertexType::kDomainCorner: EXPECT_EQ(v.key.zeros(), 2); break;
        }
    }
}

TEST(Match, IdenticalDiagramsMatchExactly) {
    const DensityMesh mesh = make_unit_square_mesh(1);
    const auto rpd = build_rpd(
        mesh, sites_at({{0.5, 0.8}, {0.2, 0.2}, {0.8, 0.2}}), {0.0, 0.0, 0.0});
    const VertexClassification cls = classify_vertices(rpd);
    const Correspondence corr = match_vertices(cls, cls);
    EXPECT_EQ(corr.matched.size(), cls.vertices.size());
    EXPECT_TRUE(corr.splits.empty());
    EXPECT_TRUE(corr.unmatched.empty());
    for (const auto& [ia, ib] : corr.matched) EXPECT_EQ(ia, ib);
}

TEST(Match, TriplePointSplitsIntoBoundaryCrossings) {
    const VertexClassification a = synthetic({cv(0.5, 0.5, 1, 2, 3)});
    const VertexClassification b =
        synthetic({cv(0.4, 0.0, 0, 1, 2), cv(0.6, 0.0, 0, 2, 3)});
    const Correspondence corr = match_vertices(a, b);
    EXPECT_TRUE(corr.matched.empty());
    ASSERT_EQ(corr.splits.size(), 1u);
    EXPECT_EQ(corr.splits[0].side, 0);
    EXPECT_EQ(corr.splits[0].source, 0);
    EXPECT_EQ(corr.splits[0].targets.size(), 2u);
    EXPECT_TRUE(corr.unmatched.empty());
}

TEST(Match, EquivalentCornersAttachToASingleVertex) {
    const VertexClassification a =
        synthetic({cv(0.0, 0.0, 0, 0, 1, 0), cv(0.0, 1.0, 0, 0, 1, 1)});
    const VertexClassification b = synthetic({cv(0.1, 0.5, 0, 0, 1, 0)});
    const Correspondence corr = match_vertices(a, b);
    ASSERT_EQ(corr.matched.size(), 2u);
    EXPECT_EQ(corr.matched[0], (std::pair<int, int>{0, 0}));
    EXPECT_EQ(corr.matched[1], (std::pair<int, int>{1, 0}));
    EXPECT_TRUE(corr.unmatched.empty());
}

TEST(Match, CrossingDegradesToCorners) {
    const VertexClassification a = synthetic({cv(0.5, 0.0, 0, 1, 2)});
    const VertexClassification b =
        synthetic({cv(0.3, 0.0, 0, 0, 1), cv(0.7, 0.0, 0, 0, 2)});
    const Correspondence corr = match_vertices(a, b);
    ASSERT_EQ(corr.splits.size(), 1u);
    EXPECT_EQ(corr.splits[0].targets.size(), 2u);
}

TEST(Match, SymmetricUnderArgumentSwap) {
    const DensityMesh mesh = make_unit_square_mesh(1);
    const auto rpd_a = build_rpd(
        mesh, sites_at({{0.5, 0.8}, {0.2, 0.2}, {0.8, 0.2}}), {0.0, 0.0, 0.0});
    const auto rpd_b = build_rpd(
        mesh, sites_at({{0.45, 0.75}, {0.25, 0.2}, {0.85, 0.25}}), {0.0, 0.0, 0.0});
    const VertexClassification ca = classify_vertices(rpd_a);
    const VertexClassification cb = classify_vertices(rpd_b);
    const Correspondence ab = match_vertices(ca, cb);
    const Correspondence ba = match_vertices(cb, ca);
    std::set<std::pair<int, int>> ab_pairs(ab.matched.begin(), ab.matched.end());
    std::set<std::pair<int, int>> ba_swapped;
    for (const auto& [i, j] : ba.matched) ba_swapped.insert({j, i});
    EXPECT_EQ(ab_pairs, ba_swapped);
    EXPECT_EQ(ab.splits.size(), ba.splits.size());
}

TEST(Outlines, SingleCellSquare) {
    const DensityMesh mesh = make_unit_square_mesh(1);
    const auto rpd = build_rpd(mesh, sites_at({{0.5, 0.5}}), {0.0});
    const auto outlines = build_cell_outlines(rpd, classify_vertices(rpd));
    ASSERT_EQ(outlines.size(), 1u);
    ASSERT_EQ(outlines[0].loops.size(), 1u);
    const auto& loop = outlines[0].loops[0];
    ASSERT_EQ(loop.size(), 4u);  // interior diagonal cancelled, corners kept
    double area = 0.0;
    for (std::size_t k = 0; k < loop.size(); ++k) {
        area += loop[k].pos.cross(loop[(k + 1) % loop.size()].pos);
    }
    EXPECT_NEAR(0.5 * area, 1.0, 1e-12);
}

TEST(Outlines, FinerMeshStillGivesOneLoopPerCell) {
    const DensityMesh mesh = make_unit_square_mesh(5);
    const auto rpd = build_rpd(mesh, sites_at({{0.3, 0.52}, {0.7, 0.48}}), {0.0, 0.0});
    const auto outlines = build_cell_outlines(rpd, classify_vertices(rpd));
    ASSERT_EQ(outlines.size(), 2u);
    double area = 0.0;
    for (const auto& outline : outlines) {
        ASSERT_EQ(outline.loops.size(), 1u);
        const auto& loop = outline.loops[0];
        double a = 0.0;
        for (std::size_t k = 0; k < loop.size(); ++k) {
            a += loop[k].pos.cross(loop[(k + 1) % loop.size()].pos);
        }
        area += 0.5 * a;
        for (const auto& ov : loop) EXPECT_GE(ov.classified, 0);
    }
    EXPECT_NEAR(area, 1.0, 1e-9);
}

TEST(Frames, EndpointsAreBitExact) {
    const DensityMesh mesh = make_unit_square_mesh(1);
    const auto rpd_a = build_rpd(
        mesh, sites_at({{0.5, 0.8}, {0.2, 0.2}, {0.8, 0.2}}), {0.0, 0.0, 0.0});
    const auto rpd_b = build_rpd(
        mesh, sites_at({{0.45, 0.75}, {0.25, 0.2}, {0.85, 0.25}}), {0.0, 0.0, 0.0});
    const MorphContext ctx = make_morph(rpd_a, rpd_b);

    const MorphFrame f0 = interpolate_frame(ctx, 0.0);
    for (std::size_t c = 0; c < f0.cells.size(); ++c) {
        const auto& loops = ctx.outlines_a[c].loops;
        ASSERT_EQ(f0.cells[c].polygons.size(), loops.size());
        for (std::size_t l = 0; l < loops.size(); ++l) {
            ASSERT_EQ(f0.cells[c].polygons[l].size(), loops[l].size());
            for (std::size_t k = 0; k < loops[l].size(); ++k) {
                EXPECT_EQ(f0.cells[c].polygons[l][k].pos.x, loops[l][k].pos.x);
                EXPECT_EQ(f0.cells[c].polygons[l][k].pos.y, loops[l][k].pos.y);
            }
        }
    }

    const MorphFrame f1 = interpolate_frame(ctx, 1.0);
    for (const auto& cell : f1.cells) {
        for (const auto& poly : cell.polygons) {
            for (const auto& v : poly) {
                if (!v.matched) continue;
                const int ib = ctx.class_b.find(v.pos);
                ASSERT_GE(ib, 0);
                EXPECT_EQ(ctx.class_b.vertices[ib].pos.x, v.pos.x);
                EXPECT_EQ(ctx.class_b.vertices[ib].pos.y, v.pos.y);
            }
        }
    }
}

TEST(Frames, KeysRoundTripAtTZero) {
    const DensityMesh mesh = make_unit_square_mesh(1);
    const auto rpd = build_rpd(
        mesh, sites_at({{0.5, 0.8}, {0.2, 0.2}, {0.8, 0.2}}), {0.0, 0.0, 0.0});
    const MorphContext ctx = make_morph(rpd, rpd);
    const MorphFrame f0 = interpolate_frame(ctx, 0.0);
    for (const auto& cell : f0.cells) {
        for (const auto& poly : cell.polygons) {
            for (const auto& v : poly) {
                const int ia = ctx.class_a.find(v.pos);
                ASSERT_GE(ia, 0);
                EXPECT_EQ(ctx.class_a.vertices[ia].key, v.key);
            }
        }
    }
}

TEST(Frames, RejectsTOutsideUnitInterval) {
    const DensityMesh mesh = make_unit_square_mesh(1);
    const auto rpd = build_rpd(mesh, sites_at({{0.5, 0.5}}), {0.0});
    const MorphContext ctx = make_morph(rpd, rpd);
    EXPECT_THROW(interpolate_frame(ctx, -0.1), Error);
    EXPECT_THROW(interpolate_frame(ctx, 1.1), Error);
}

TEST(Frames, TranslationCouplingMovesHalfwayAtMidpoint) {
    const DensityMesh mu = make_unit_square_mesh(2);
    const DensityMesh nu = make_rect_mesh({2, 0}, {3, 1}, 2, 2);
    const RunResult res = run_coupling(mu, nu, 6, 100, 4);
    const MorphContext ctx = make_morph(res.state.rpd_mu, res.state.rpd_nu);
    const MorphFrame mid = interpolate_frame(ctx, 0.5);
    double area = 0.0;
    for (const auto& cell : mid.cells) {
        area += cell.area;
        for (const auto& poly : cell.polygons) {
            for (const auto& v : poly) {
                EXPECT_GE(v.pos.x, 1.0 - 2e-5);
                EXPECT_LE(v.pos.x, 2.0 + 2e-5);
                EXPECT_GE(v.pos.y, 0.0 - 2e-5);
                EXPECT_LE(v.pos.y, 1.0 + 2e-5);
            }
        }
    }
    EXPECT_NEAR(area, 1.0, 1e-3);
}

TEST(Frames, ReversedCouplingMirrorsGeometry) {
    // exactly matched pair: the same two-cell layout on two translated squares
    const DensityMesh mu = make_unit_square_mesh(1);
    const DensityMesh nu = make_rect_mesh({2, 0}, {3, 1}, 1, 1);
    const auto rpd_a = build_rpd(mu, sites_at({{0.25, 0.5}, {0.75, 0.5}}), {0.0, 0.0});
    const auto rpd_b = build_rpd(nu, sites_at({{2.25, 0.5}, {2.75, 0.5}}), {0.0, 0.0});
    const MorphContext fwd = make_morph(rpd_a, rpd_b);
    const MorphContext rev = make_morph(rpd_b, rpd_a);
    EXPECT_EQ(fwd.corr.matched.size(), fwd.class_a.vertices.size());
    for (const double t : {0.25, 0.5, 0.75}) {
        const MorphFrame a = interpolate_frame(fwd, t);
        const MorphFrame b = interpolate_frame(rev, 1.0 - t);
        const std::string svg_a = frame_to_svg(a);
        const std::string svg_b = frame_to_svg(b);
        EXPECT_EQ(svg_a, svg_b);  // identical geometry, identical path data
    }
}

TEST(Frames, ReversalKeepsMatchedPositionsOnNumericCoupling) {
    const DensityMesh mu = make_unit_square_mesh(2);
    const DensityMesh nu = make_rect_mesh({2, 0}, {3, 1}, 2, 2);
    const RunResult res = run_coupling(mu, nu, 5, 40, 8);
    const MorphContext fwd = make_morph(res.state.rpd_mu, res.state.rpd_nu);
    const MorphContext rev = make_morph(res.state.rpd_nu, res.state.rpd_mu);
    for (const double t : {0.25, 0.5, 0.75}) {
        for (const auto& [ia, ib] : fwd.corr.matched) {
            const Point2 p = fwd.class_a.vertices[ia].pos * (1.0 - t) +
                             fwd.class_b.vertices[ib].pos * t;
            const Point2 q = rev.class_a.vertices[ib].pos * t +
                             rev.class_b.vertices[ia].pos * (1.0 - t);
            EXPECT_NEAR(p.x, q.x, 1e-9);
            EXPECT_NEAR(p.y, q.y, 1e-9);
        }
    }
}

TEST(Svg, EmptyFrameIsStillADocument) {
    MorphFrame frame;
    frame.t = 0.5;
    const std::string svg = frame_to_svg(frame);
    EXPECT_NE(svg.find("<svg"), std::string::npos);
    EXPECT_NE(svg.find("</svg>"), std::string::npos);
    EXPECT_EQ(svg.find("<path"), std::string::npos);
}

TEST(Svg, SingleSquareCellBecomesOnePath) {
    const DensityMesh mesh = make_unit_square_mesh(1);
    const auto rpd = build_rpd(mesh, sites_at({{0.5, 0.5}}), {0.0});
    const MorphContext ctx = make_morph(rpd, rpd);
    const std::string svg = frame_to_svg(interpolate_frame(ctx, 0.0));
    std::size_t paths = 0, at = 0;
    while ((at = svg.find("<path", at)) != std::string::npos) {
        ++paths;
        ++at;
    }
    EXPECT_EQ(paths, 1u);
    // 4 vertices: one M and three L commands
    const std::size_t d = svg.find(" d=\"M");
    ASSERT_NE(d, std::string::npos);
    std::size_t ls = 0;
    for (std::size_t i = d; i < svg.find('"', d + 4); ++i) ls += (svg[i] == 'L') ? 1 : 0;
    EXPECT_EQ(ls, 3u);
}

TEST(Svg, DeterministicOutput) {
    const DensityMesh mesh = make_unit_square_mesh(2);
    const auto rpd = build_rpd(mesh, sites_at({{0.3, 0.5}, {0.7, 0.5}}), {0.0, 0.0});
    const MorphContext ctx = make_morph(rpd, rpd);
    const std::string a = frame_to_svg(interpolate_frame(ctx, 0.25));
    const std::string b = frame_to_svg(interpolate_frame(ctx, 0.25));
    EXPECT_EQ(a, b);
}

TEST(Stats, AdjacencyPreservationOnIdenticalDiagrams) {
    const DensityMesh mesh = make_disk_mesh({0.5, 0.5}, 0.4, 4);
    const SiteSet sites = sample_sites(mesh, 15, 2);
    const auto rpd = build_rpd(mesh, sites, WeightVector(15, 0.0));
    EXPECT_EQ(adjacency_preservation(rpd, rpd), 1.0);
}
