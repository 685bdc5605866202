// Semi-discrete optimal transport: adjust power-diagram weights until every
// cell carries its prescribed mass, via limited-memory quasi-Newton ascent of
// the concave Kantorovich functional.
#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <vector>

#include "symot/restricted_power_diagram.hpp"

namespace symot {

struct SolveReport {
    int iterations = 0;
    double final_gradient_norm = 0.0;       // max-norm of (target - mass)
    double max_relative_mass_error = 0.0;
    std::vector<int> empty_cell_indices;
    bool converged = false;
    std::vector<double> functional_trace;   // functional value at accepted iterates
};

struct SolveOptions {
    double tol = 1e-6;     // gradient stop: |g|_inf <= tol * min(target)
    int max_iter = 1000;
    int memory = 10;
    int max_halvings = 30;
    int threads = 1;
};

struct FunctionalValue {
    double value = 0.0;
    std::vector<double> gradient;  // component i: target_i - mass_i
};

/// The transport functional of the weights,
///   Phi(w) = sum_i int_{cell_i} (|x - x_i|^2 - w_i) dmu + sum_i p_i w_i,
/// evaluated on a prebuilt diagram. Concave; its gradient component i is
/// p_i - mass(cell_i), so stationarity is exactly the mass constraint.
inline FunctionalValue evaluate_functional(const RestrictedPowerDiagram& rpd,
                                           const std::vector<double>& target_masses) {
    FunctionalValue out;
    const int n = rpd.site_count();
    out.gradient.resize(n);
    for (int i = 0; i < n; ++i) {
        const Moments& m = rpd.cells[i].moments;
        out.value += m.cost - rpd.weights[i] * m.mass + target_masses[i] * rpd.weights[i];
        out.gradient[i] = target_masses[i] - m.mass;
    }
    return out;
}

inline FunctionalValue evaluate_functional(const DensityMesh& mesh, const SiteSet& sites,
                                           const WeightVector& weights,
                                           const std::vector<double>& target_masses) {
    return evaluate_functional(build_rpd(mesh, sites, weights), target_masses);
}

struct SolveResult {
    WeightVector weights;        // normalized to zero mean
    SolveReport report;
    RestrictedPowerDiagram rpd;  // diagram at the returned weights
};

namespace detail {

class LbfgsMemory {
public:
    explicit LbfgsMemory(int capacity) : capacity_(capacity) {}

    void clear() { pairs_.clear(); }

    void push(std::vector<double> s, std::vector<double> y) {
        const double sy = std::inner_product(s.begin(), s.end(), y.begin(), 0.0);
        double ss = 0.0, yy = 0.0;
        for (double v : s) ss += v * v;
        for (double v : y) yy += v * v;
        if (!(sy > 1e-12 * std::sqrt(ss * yy))) return;  // curvature too weak
        pairs_.push_back({std::move(s), std::move(y), sy});
        if (static_cast<int>(pairs_.size()) > capacity_) pairs_.pop_front();
    }

    /// Two-loop recursion: d = -H g, with H seeded by the last pair's scaling.
    std::vector<double> descent_direction(const std::vector<double>& g) const {
        std::vector<double> q = g;
        std::vector<double> alpha(pairs_.size());
        for (int k = static_cast<int>(pairs_.size()) - 1; k >= 0; --k) {
            const auto& p = pairs_[k];
            alpha[k] = std::inner_product(p.s.begin(), p.s.end(), q.begin(), 0.0) / p.sy;
            for (std::size_t i = 0; i < q.size(); ++i) q[i] -= alpha[k] * p.y[i];
        }
        if (!pairs_.empty()) {
            const auto& last = pairs_.back();
            double yy = 0.0;
            for (double v : last.y) yy += v * v;
            const double gamma = last.sy / yy;
            for (double& v : q) v *= gamma;
        }
        for (std::size_t k = 0; k < pairs_.size(); ++k) {
            const auto& p = pairs_[k];
            const double beta =
                std::inner_product(p.y.begin(), p.y.end(), q.begin(), 0.0) / p.sy;
            for (std::size_t i = 0; i < q.size(); ++i) q[i] += (alpha[k] - beta) * p.s[i];
        }
        for (double& v : q) v = -v;
        return q;
    }

    bool empty() const { return pairs_.empty(); }

private:
    struct Pair {
        std::vector<double> s, y;
        double sy;
    };
    int capacity_;
    std::deque<Pair> pairs_;
};

}  // namespace detail

/// Ascends Phi from init until |gradient|_inf <= tol * min(target) or
/// max_iter accepted steps. Line-search steps that would empty a currently
/// nonempty cell are halved (the functional's gradient goes flat there);
/// accepted steps never decrease Phi. Returned weights are zero-mean: Phi is
/// invariant under a common shift, and so is the diagram, exactly.
inline SolveResult solve_weights(const DensityMesh& mesh, const SiteSet& sites,
                                 const std::vector<double>& target_masses,
                                 const WeightVector& init, const SolveOptions& opts = {}) {
    const int n = sites.count();
    if (static_cast<int>(target_masses.size()) != n)
        throw Error("solve_weights: target count mismatch");
    if (static_cast<int>(init.size()) != n)
        throw Error("solve_weights: init weight count mismatch");
    double min_target = std::numeric_limits<double>::infinity(), sum_target = 0.0;
    for (double p : target_masses) {
        if (!(p > 0.0)) throw Error("solve_weights: targets must be positive");
        min_target = std::min(min_target, p);
        sum_target += p;
    }
    if (std::abs(sum_target - mesh.total_mass()) > 1e-9 * mesh.total_mass())
        throw Error("solve_weights: target masses must sum to the mesh mass");

    RpdOptions rpd_opts;
    rpd_opts.threads = opts.threads;

    struct Eval {
        WeightVector w;
        RestrictedPowerDiagram rpd;
        double f = 0.0;                 // -Phi, minimized
        std::vector<double> grad;       // gradient of -Phi: mass_i - target_i
        std::vector<char> empty;
    };
    auto evaluate = [&](WeightVector w) {
        Eval e;
        e.rpd = build_rpd(mesh, sites, w, rpd_opts);
        const FunctionalValue fv = evaluate_functional(e.rpd, target_masses);
        e.f = -fv.value;
        e.grad.resize(n);
        e.empty.resize(n);
        for (int i = 0; i < n; ++i) {
            e.grad[i] = -fv.gradient[i];
            e.empty[i] = e.rpd.cells[i].empty() ? 1 : 0;
        }
        e.w = std::move(w);
        return e;
    };
    auto kills_live_cell = [n](const Eval& from, const Eval& to) {
        for (int i = 0; i < n; ++i) {
            if (!from.empty[i] && to.empty[i]) return true;
        }
        return false;
    };

    Eval cur = evaluate(init);
    const double gtol = opts.tol * min_target;
    constexpr double kArmijo = 1e-4;

    detail::LbfgsMemory mem(opts.memory);
    SolveReport report;
    report.functional_trace.push_back(-cur.f);

    auto grad_inf = [](const std::vector<double>& g) {
        double m = 0.0;
        for (double v : g) m = std::max(m, std::abs(v));
        return m;
    };

    bool stalled = false;
    while (report.iterations < opts.max_iter) {
        if (grad_inf(cur.grad) <= gtol) break;

        std::vector<double> dir = mem.descent_direction(cur.grad);
        double gd = std::inner_product(cur.grad.begin(), cur.grad.end(), dir.begin(), 0.0);
        if (!(gd < 0.0)) {
            mem.clear();
            dir = cur.grad;
            for (double& v : dir) v = -v;
            gd = -std::inner_product(cur.grad.begin(), cur.grad.end(), cur.grad.begin(), 0.0);
        }

        // Halve the step while it would empty a currently nonempty cell and
        // keep the first point passing the sufficient-decrease test; if no
        // cell-preserving point passes within the budget, the best decreasing
        // point is accepted anyway (the functional stays concave with empty
        // cells, they only slow the quasi-Newton model down). Once the
        // directional decrease falls below the functional's rounding noise,
        // sufficient decrease is judged on the mass residual instead: the
        // masses are exact to rounding, the functional is not.
        bool accepted = false;
        bool have_best = false;
        Eval best;
        double step = 1.0;
        const double f_noise = 1e-12 * (std::abs(cur.f) + 1.0);
        const double cur_gnorm = grad_inf(cur.grad);
        for (int h = 0; h <= opts.max_halvings; ++h, step *= 0.5) {
            WeightVector trial(n);
            for (int i = 0; i < n; ++i) trial[i] = cur.w[i] + step * dir[i];
            Eval e = evaluate(std::move(trial));
            const bool below_noise = step * (-gd) <= f_noise;
            const bool decreases = below_noise
                                       ? grad_inf(e.grad) <= cur_gnorm * (1.0 - 1e-3 * step)
                                       : e.f <= cur.f + kArmijo * step * gd;
            if (decreases && !kills_live_cell(cur, e)) {
                best = std::move(e);
                have_best = true;
                accepted = true;
                break;
            }
            if (decreases && !have_best) {
                best = std::move(e);  // feasibility waived after the halving budget
                have_best = true;
            }
        }
        if (!accepted && !have_best) {
            if (!mem.empty()) {
                mem.clear();   // retry along the raw gradient
                continue;
            }
            stalled = true;
            break;
        }

        std::vector<double> s(n), y(n);
        for (int i = 0; i < n; ++i) {
            s[i] = best.w[i] - cur.w[i];
            y[i] = best.grad[i] - cur.grad[i];
        }
        mem.push(std::move(s), std::move(y));
        cur = std::move(best);
        ++report.iterations;
        report.functional_trace.push_back(-cur.f);
    }

    report.final_gradient_norm = grad_inf(cur.grad);
    report.converged = !stalled && report.final_gradient_norm <= gtol;
    report.empty_cell_indices = cur.rpd.empty_cell_indices();
    report.max_relative_mass_error = 0.0;
    for (int i = 0; i < n; ++i) {
        report.max_relative_mass_error = std::max(
            report.max_relative_mass_error, std::abs(cur.grad[i]) / target_masses[i]);
    }
    if (!report.empty_cell_indices.empty()) report.converged = false;

    const double mean = std::accumulate(cur.w.begin(), cur.w.end(), 0.0) / n;
    for (double& w : cur.w) w -= mean;
    cur.rpd.weights = cur.w;  // shift leaves every piece bit-identical

    SolveResult out;
    out.weights = std::move(cur.w);
    out.report = std::move(report);
    out.rpd = std::move(cur.rpd);
    return out;
}

}  // namespace symot
