#include <gtest/gtest.h>

#include "symot/shapes.hpp"
#include "symot/symmetrizer.hpp"

using namespace symot;

namespace {

bool inside_mesh(const DensityMesh& mesh, const Point2& p) {
    for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
        if (mesh.point_in_triangle(t, p, 1e-12)) return true;
    }
    return false;
}

CoupledState preset_two_site_square_state(const DensityMesh& mesh) {
    CoupledState st;
    st.x_sites.positions = {{0.25, 0.5}, {0.75, 0.5}};
    st.x_sites.target_mass = 0.5;
    st.y_sites = st.x_sites;
    st.phi = {0.0, 0.0};
    st.psi = {0.0, 0.0};
    st.rpd_mu = build_rpd(mesh, st.x_sites, st.phi);
    st.rpd_nu = build_rpd(mesh, st.y_sites, st.psi);
    return st;
}

}  // namespace

TEST(InitCoupling, SitesLandOnTheRightSupports) {
    const DensityMesh mu = make_unit_square_mesh(2);
    const DensityMesh nu = make_rect_mesh({3, 0}, {4, 1}, 2, 2);
    const CoupledState st = init_coupling(mu, nu, 8, 7);
    ASSERT_EQ(st.count(), 8);
    for (const Point2& p : st.x_sites.positions) EXPECT_TRUE(inside_mesh(nu, p));
    for (const Point2& p : st.y_sites.positions) EXPECT_TRUE(inside_mesh(mu, p));
    EXPECT_EQ(st.iteration, 0);
    for (double w : st.phi) EXPECT_EQ(w, 0.0);
    for (double w : st.psi) EXPECT_EQ(w, 0.0);
    EXPECT_NEAR(st.x_sites.target_mass, mu.total_mass() / 8, 1e-15);
    EXPECT_NEAR(st.y_sites.target_mass, nu.total_mass() / 8, 1e-15);
}

TEST(InitCoupling, Deterministic) {
    const DensityMesh mu = make_unit_square_mesh(2);
    const DensityMesh nu = make_disk_mesh({0.5, 0.5}, 0.4, 4);
    const CoupledState a = init_coupling(mu, nu, 6, 313);
    const CoupledState b = init_coupling(mu, nu, 6, 313);
    for (int i = 0; i < 6; ++i) {
        EXPECT_EQ(a.x_sites.positions[i].x, b.x_sites.positions[i].x);
        EXPECT_EQ(a.y_sites.positions[i].y, b.y_sites.positions[i].y);
    }
}

TEST(InitCoupling, SingleSite) {
    const DensityMesh mu = make_unit_square_mesh(1);
    const CoupledState st = init_coupling(mu, mu, 1, 0);
    EXPECT_EQ(st.count(), 1);
    EXPECT_EQ(st.phi, WeightVector{0.0});
    EXPECT_EQ(st.psi, WeightVector{0.0});
}

TEST(InitCoupling, RejectsZeroSites) {
    const DensityMesh mu = make_unit_square_mesh(1);
    EXPECT_THROW(init_coupling(mu, mu, 0, 1), Error);
}

TEST(Iterate, TwoSiteSquareSelfCouplingIsAFixedPoint) {
    // cells are the half-squares whose centroids are the sites themselves
    const DensityMesh mesh = make_unit_square_mesh(1);
    const CoupledState st = preset_two_site_square_state(mesh);
    const CoupledState next = iterate(mesh, mesh, st);
    EXPECT_EQ(next.iteration, 1);
    for (int i = 0; i < 2; ++i) {
        EXPECT_NEAR(next.x_sites.positions[i].x, st.x_sites.positions[i].x, 1e-9);
        EXPECT_NEAR(next.x_sites.positions[i].y, st.x_sites.positions[i].y, 1e-9);
        EXPECT_NEAR(next.y_sites.positions[i].x, st.y_sites.positions[i].x, 1e-9);
        EXPECT_NEAR(next.y_sites.positions[i].y, st.y_sites.positions[i].y, 1e-9);
    }
    EXPECT_LT(next.last_displacement, 1e-9);
}

TEST(Iterate, SingleSiteLandsOnBarycenters) {
    const DensityMesh mu = make_unit_square_mesh(1);
    const DensityMesh nu = make_rect_mesh({2, 0}, {3, 1}, 1, 1);
    CoupledState st = init_coupling(mu, nu, 1, 5);
    st = iterate(mu, nu, st);
    EXPECT_NEAR(st.y_sites.positions[0].x, 0.5, 1e-12);
    EXPECT_NEAR(st.y_sites.positions[0].y, 0.5, 1e-12);
    EXPECT_NEAR(st.x_sites.positions[0].x, 2.5, 1e-12);
    EXPECT_NEAR(st.x_sites.positions[0].y, 0.5, 1e-12);
}

TEST(Iterate, TranslationEquivariant) {
    // translating nu (and the x samples that live on it) by T translates the
    // new x sites and leaves the y sites in place; solves are tightened so
    // both runs land on the same transport cells
    const DensityMesh mu = make_disk_mesh({0.5, 0.5}, 0.45, 3);
    const DensityMesh nu = make_unit_square_mesh(2);
    const Vec2 T{2.0, -1.0};
    const DensityMesh nu_t = make_rect_mesh({0.0 + T.x, 0.0 + T.y}, {1.0 + T.x, 1.0 + T.y}, 2, 2);

    CouplingOptions opts;
    opts.solver.tol = 1e-12;

    CoupledState st = init_coupling(mu, nu, 6, 11, opts);
    CoupledState st_t = st;
    for (Point2& p : st_t.x_sites.positions) p += T;
    st_t.rpd_mu = build_rpd(mu, st_t.x_sites, st_t.phi);
    st_t.rpd_nu = build_rpd(nu_t, st_t.y_sites, st_t.psi);

    const CoupledState a = iterate(mu, nu, st, opts);
    const CoupledState b = iterate(mu, nu_t, st_t, opts);
    for (int i = 0; i < st.count(); ++i) {
        EXPECT_NEAR(b.x_sites.positions[i].x, a.x_sites.positions[i].x + T.x, 1e-9);
        EXPECT_NEAR(b.x_sites.positions[i].y, a.x_sites.positions[i].y + T.y, 1e-9);
        EXPECT_NEAR(b.y_sites.positions[i].x, a.y_sites.positions[i].x, 1e-9);
        EXPECT_NEAR(b.y_sites.positions[i].y, a.y_sites.positions[i].y, 1e-9);
    }
}

TEST(Diagnostics, FixedPointHasTinyResiduals) {
    const DensityMesh mesh = make_unit_square_mesh(1);
    CoupledState st = preset_two_site_square_state(mesh);
    st = iterate(mesh, mesh, st);
    const CouplingDiagnostics d = diagnostics(mesh, mesh, st);
    EXPECT_LE(d.barycenter_residual_x, 1e-9);
    EXPECT_LE(d.barycenter_residual_y, 1e-9);
    EXPECT_TRUE(d.overlap_suspects.empty());
}

TEST(Diagnostics, ResidualXVanishesRightAfterIterate) {
    const DensityMesh mu = make_unit_square_mesh(2);
    const DensityMesh nu = make_disk_mesh({0.5, 0.5}, 0.45, 3);
    CoupledState st = init_coupling(mu, nu, 5, 3);
    st = iterate(mu, nu, st);
    const CouplingDiagnostics d = diagnostics(mu, nu, st);
    // x was just recentered at the nu-cell barycenters; y has drifted by (c)-(d)
    EXPECT_LE(d.barycenter_residual_x, 1e-12);
    EXPECT_GE(d.barycenter_residual_y, 0.0);
}

TEST(Diagnostics, FlagsCellsSpanningDisconnectedSupport) {
    // nu is two far disks; with 3 samples one nu-cell must straddle them
    const DensityMesh mu = make_unit_square_mesh(2);
    const DensityMesh nu = make_disks_mesh({{{0.25, 0.5}, 0.2}, {{0.75, 0.5}, 0.2}}, 3);
    CoupledState st;
    st.x_sites.positions = {{0.2, 0.45}, {0.5, 0.55}, {0.8, 0.45}};
    st.x_sites.target_mass = mu.total_mass() / 3;
    st.y_sites = st.x_sites;
    st.y_sites.target_mass = nu.total_mass() / 3;
    st.phi = {0, 0, 0};
    st.psi = {0, 0, 0};
    st.rpd_mu = build_rpd(mu, st.x_sites, st.phi);
    st.rpd_nu = build_rpd(nu, st.y_sites, st.psi);

    CouplingOptions opts;
    const std::vector<double> q(3, nu.total_mass() / 3);
    const SolveResult solved = solve_weights(nu, st.y_sites, q, st.psi, opts.solver);
    ASSERT_TRUE(solved.report.converged);
    st.psi = solved.weights;

    const CouplingDiagnostics d = diagnostics(mu, nu, st, opts);
    EXPECT_FALSE(d.overlap_suspects.empty());
}

TEST(Run, RejectsZeroIterations) {
    const DensityMesh mesh = make_unit_square_mesh(1);
    EXPECT_THROW(run_coupling(mesh, mesh, 2, 0, 1), Error);
}

TEST(Run, DeterministicAndEarlyStops) {
    const DensityMesh mesh = make_unit_square_mesh(2);
    const RunResult a = run_coupling(mesh, mesh, 4, 30, 9);
    const RunResult b = run_coupling(mesh, mesh, 4, 30, 9);
    ASSERT_EQ(a.history.size(), b.history.size());
    for (int i = 0; i < 4; ++i) {
        EXPECT_EQ(a.state.x_sites.positions[i].x, b.state.x_sites.positions[i].x);
        EXPECT_EQ(a.state.y_sites.positions[i].y, b.state.y_sites.positions[i].y);
    }
    EXPECT_EQ(a.state.iteration, static_cast<int>(a.history.size()));
}

TEST(Run, SelfCouplingDrivesResidualsDown) {
    // the coupled fixed point settles after an early rearrangement phase
    const DensityMesh mesh = make_disk_mesh({0.5, 0.5}, 0.5, 5);
    const RunResult res = run_coupling(mesh, mesh, 12, 200, 2);
    const CouplingDiagnostics& last = res.history.back();
    EXPECT_LE(last.barycenter_residual_x, 1e-4 * mesh.diameter());
    EXPECT_LE(last.barycenter_residual_y, 1e-4 * mesh.diameter());
    // index correspondence: matched cells carry equal mass fractions
    const double p = mesh.total_mass() / 12;
    for (int i = 0; i < 12; ++i) {
        EXPECT_NEAR(res.state.rpd_mu.cell_stats(i).mass, p, 1e-5 * p);
        EXPECT_NEAR(res.state.rpd_nu.cell_stats(i).mass, p, 1e-5 * p);
    }
}

TEST(Run, TranslatedSquaresCoupleThroughTheTranslation) {
    const DensityMesh mu = make_unit_square_mesh(2);
    const DensityMesh nu = make_rect_mesh({2, 0}, {3, 1}, 2, 2);
    const RunResult res = run_coupling(mu, nu, 6, 100, 4);
    // optimal coupling between translates is the translation itself
    for (int i = 0; i < 6; ++i) {
        EXPECT_NEAR(res.state.x_sites.positions[i].x - 2.0, res.state.y_sites.positions[i].x,
                    2e-5);
        EXPECT_NEAR(res.state.x_sites.positions[i].y, res.state.y_sites.positions[i].y, 2e-5);
    }
}
