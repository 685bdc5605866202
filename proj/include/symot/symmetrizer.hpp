// Alternating fixed point coupling two semi-discrete transport maps: solve
// weights on one side, recenter the other side's samples at the resulting
// cell barycenters, then swap roles. At convergence the two power diagrams
// carry matched cell geometry.
#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "symot/density_mesh.hpp"
#include "symot/rng.hpp"
#include "symot/sdot_solver.hpp"

namespace symot {

struct CoupledState {
    SiteSet x_sites;  // N samples approximating nu; their cells live on Sp(mu)
    WeightVector phi;
    SiteSet y_sites;  // N samples approximating mu; their cells live on Sp(nu)
    WeightVector psi;
    RestrictedPowerDiagram rpd_mu;  // built during the last phi solve
    RestrictedPowerDiagram rpd_nu;  // built during the last psi solve
    int iteration = 0;
    double last_displacement = std::numeric_limits<double>::infinity();
    double mass_ratio_error = 0.0;  // |mass(mu) - mass(nu)| / mass(mu)

    int count() const { return x_sites.count(); }
};

struct CouplingDiagnostics {
    int iteration = 0;
    double barycenter_residual_x = 0.0;  // max_i |x_i - bary_nu(cell_i of psi)|
    double barycenter_residual_y = 0.0;  // max_i |y_i - bary_mu(cell_i of phi)|
    double site_displacement = 0.0;
    std::vector<int> overlap_suspects;   // cells spanning mesh components
};

/// Raised when an embedded weight solve fails to converge; carries the last
/// consistent state so callers can inspect or checkpoint it.
class CouplingFailure : public Error {
public:
    CouplingFailure(std::string stage, SolveReport rep, CoupledState last, int outer_iteration)
        : Error("coupling: " + stage + " solve did not converge at outer iteration " +
                std::to_string(outer_iteration)),
          stage_(std::move(stage)),
          report_(std::move(rep)),
          last_state_(std::move(last)),
          outer_iteration_(outer_iteration) {}

    const std::string& stage() const { return stage_; }
    const SolveReport& report() const { return report_; }
    const CoupledState& last_state() const { return last_state_; }
    int outer_iteration() const { return outer_iteration_; }

private:
    std::string stage_;
    SolveReport report_;
    CoupledState last_state_;
    int outer_iteration_;
};

struct CouplingOptions {
    SampleMode sample_mode = SampleMode::kArea;
    SolveOptions solver;
    double stop_displacement_factor = 1e-10;  // times the joint domain diameter
};

inline double joint_diameter(const DensityMesh& mu, const DensityMesh& nu) {
    Point2 lo{std::min(mu.bbox_min().x, nu.bbox_min().x),
              std::min(mu.bbox_min().y, nu.bbox_min().y)};
    Point2 hi{std::max(mu.bbox_max().x, nu.bbox_max().x),
              std::max(mu.bbox_max().y, nu.bbox_max().y)};
    return (hi - lo).norm();
}

/// Samples x on Sp(nu) and y on Sp(mu) from independent sub-seeds; both
/// weight vectors start at zero so the first solves start from Voronoi
/// diagrams. The initial diagrams are built so diagnostics are available
/// before the first iteration.
inline CoupledState init_coupling(const DensityMesh& mu, const DensityMesh& nu, int n,
                                  std::uint64_t seed, const CouplingOptions& opts = {}) {
    if (n < 1) throw Error("init_coupling: n must be >= 1");
    CoupledState st;
    st.x_sites = sample_sites(nu, n, derive_seed(seed, stream::kSitesX), opts.sample_mode);
    st.x_sites.target_mass = mu.total_mass() / n;  // x cells partition Sp(mu)
    st.y_sites = sample_sites(mu, n, derive_seed(seed, stream::kSitesY), opts.sample_mode);
    st.y_sites.target_mass = nu.total_mass() / n;
    st.phi.assign(n, 0.0);
    st.psi.assign(n, 0.0);
    RpdOptions ro;
    ro.threads = opts.solver.threads;
    st.rpd_mu = build_rpd(mu, st.x_sites, st.phi, ro);
    st.rpd_nu = build_rpd(nu, st.y_sites, st.psi, ro);
    st.mass_ratio_error = std::abs(mu.total_mass() - nu.total_mass()) / mu.total_mass();
    return st;
}

/// One sweep of the alternating algorithm:
///   (a) solve phi for mu -> x (warm-started),
///   (b) move each y_i to the mu-barycenter of cell i,
///   (c) solve psi for nu -> y (warm-started),
///   (d) move each x_i to the nu-barycenter of cell i.
/// Throws CouplingFailure (carrying the input state) if a solve fails.
inline CoupledState iterate(const DensityMesh& mu, const DensityMesh& nu,
                            const CoupledState& state, const CouplingOptions& opts = {}) {
    const int n = state.count();
    const std::vector<double> p(n, mu.total_mass() / n);
    const std::vector<double> q(n, nu.total_mass() / n);

    CoupledState next = state;

    SolveResult phi_solve = solve_weights(mu, state.x_sites, p, state.phi, opts.solver);
    if (!phi_solve.report.converged)
        throw CouplingFailure("mu->x", phi_solve.report, state, state.iteration + 1);

    double moved = 0.0;
    SiteSet new_y = state.y_sites;
    new_y.target_mass = nu.total_mass() / n;
    for (int i = 0; i < n; ++i) {
        const CellStats cs = phi_solve.rpd.cell_stats(i);
        if (!cs.barycenter)
            throw CouplingFailure("mu->x (empty cell)", phi_solve.report, state,
                                  state.iteration + 1);
        moved = std::max(moved, dist(*cs.barycenter, state.y_sites.positions[i]));
        new_y.positions[i] = *cs.barycenter;
    }

    SolveResult psi_solve = solve_weights(nu, new_y, q, state.psi, opts.solver);
    if (!psi_solve.report.converged)
        throw CouplingFailure("nu->y", psi_solve.report, state, state.iteration + 1);

    SiteSet new_x = state.x_sites;
    new_x.target_mass = mu.total_mass() / n;
    for (int i = 0; i < n; ++i) {
        const CellStats cs = psi_solve.rpd.cell_stats(i);
        if (!cs.barycenter)
            throw CouplingFailure("nu->y (empty cell)", psi_solve.report, state,
                                  state.iteration + 1);
        moved = std::max(moved, dist(*cs.barycenter, state.x_sites.positions[i]));
        new_x.positions[i] = *cs.barycenter;
    }

    next.phi = std::move(phi_solve.weights);
    next.rpd_mu = std::move(phi_solve.rpd);
    next.y_sites = std::move(new_y);
    next.psi = std::move(psi_solve.weights);
    next.rpd_nu = std::move(psi_solve.rpd);
    next.x_sites = std::move(new_x);
    next.iteration = state.iteration + 1;
    next.last_displacement = moved;
    return next;
}

/// Residuals of the coupled fixed point, measured against diagrams rebuilt at
/// the state's current sites (the stored diagrams are trivially centered by
/// construction right after an iterate).
inline CouplingDiagnostics diagnostics(const DensityMesh& mu, const DensityMesh& nu,
                                       const CoupledState& state,
                                       const CouplingOptions& opts = {}) {
    CouplingDiagnostics d;
    d.iteration = state.iteration;
    d.site_displacement = state.last_displacement;

    RpdOptions ro;
    ro.threads = opts.solver.threads;
    const RestrictedPowerDiagram rpd_mu = build_rpd(mu, state.x_sites, state.phi, ro);
    const RestrictedPowerDiagram rpd_nu = build_rpd(nu, state.y_sites, state.psi, ro);

    for (int i = 0; i < state.count(); ++i) {
        const CellStats cm = rpd_mu.cell_stats(i);
        const CellStats cn = rpd_nu.cell_stats(i);
        d.barycenter_residual_y = std::max(
            d.barycenter_residual_y,
            cm.barycenter ? dist(*cm.barycenter, state.y_sites.positions[i])
                          : std::numeric_limits<double>::infinity());
        d.barycenter_residual_x = std::max(
            d.barycenter_residual_x,
            cn.barycenter ? dist(*cn.barycenter, state.x_sites.positions[i])
                          : std::numeric_limits<double>::infinity());
    }

    std::vector<int> suspects = rpd_mu.component_spanning_cells();
    for (int i : rpd_nu.component_spanning_cells()) suspects.push_back(i);
    std::sort(suspects.begin(), suspects.end());
    suspects.erase(std::unique(suspects.begin(), suspects.end()), suspects.end());
    d.overlap_suspects = std::move(suspects);
    return d;
}

struct RunResult {
    CoupledState state;
    std::vector<CouplingDiagnostics> history;
};

/// Runs the alternating algorithm outer_iters times (default 100), stopping
/// early once sites move by less than stop_displacement_factor times the
/// joint domain diameter. Solve failures abort with the iteration index.
inline RunResult run_coupling(const DensityMesh& mu, const DensityMesh& nu, int n,
                              int outer_iters, std::uint64_t seed,
                              const CouplingOptions& opts = {}) {
    if (outer_iters < 1) throw Error("run_coupling: outer_iters must be >= 1");
    RunResult out;
    out.state = init_coupling(mu, nu, n, seed, opts);
    const double stop = opts.stop_displacement_factor * joint_diameter(mu, nu);
    for (int k = 0; k < outer_iters; ++k) {
        out.state = iterate(mu, nu, out.state, opts);
        out.history.push_back(diagnostics(mu, nu, out.state, opts));
        if (out.state.last_displacement < stop) break;
    }
    return out;
}

}  // namespace symot
