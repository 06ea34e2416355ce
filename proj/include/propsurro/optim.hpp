#pragma once

#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <utility>

#include "propsurro/common.hpp"
#include "propsurro/rng.hpp"

namespace propsurro {

// ------------------------------- Adam -------------------------------

struct AdamState {
    double learning_rate = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    Vec m;  // first moment
    Vec v;  // second moment
    long step_count = 0;

    explicit AdamState(Eigen::Index dim, double lr = 1e-4)
        : learning_rate(lr), m(Vec::Zero(dim)), v(Vec::Zero(dim)) {}
};

// Bias-corrected Adam update, in place.
inline void adam_step(AdamState& state, Vec& params, const Vec& grad) {
    if (params.size() != state.m.size() || grad.size() != state.m.size())
        throw DimensionMismatch("adam_step: params/grad/state dimensions disagree");
    state.step_count += 1;
    state.m = state.beta1 * state.m + (1.0 - state.beta1) * grad;
    state.v = state.beta2 * state.v + (1.0 - state.beta2) * grad.cwiseProduct(grad);
    const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
    const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));
    params.array() -= state.learning_rate * (state.m.array() / c1) /
                      ((state.v.array() / c2).sqrt() + state.eps);
}

// ------------------------------- L-BFGS -------------------------------

// Objective callback: fills grad, returns f(x).
using Objective = std::function<double(const Vec&, Vec&)>;

// Optional value-only callback for objectives whose gradient costs much more
// than the value (the GP marginal likelihood needs an extra matrix inverse).
// Must agree with the full objective's value at every point.
using ValueObjective = std::function<double(const Vec&)>;

struct LbfgsOptions {
    int memory = 10;
    int max_iterations = 500;
    double grad_tolerance = 1e-8;
    int max_line_search = 40;
    double wolfe_c1 = 1e-4;
    double wolfe_c2 = 0.9;
};

struct LbfgsResult {
    Vec x;
    double f = std::numeric_limits<double>::infinity();
    double grad_norm = std::numeric_limits<double>::infinity();
    int iterations = 0;
    bool converged = false;
};

namespace detail {

// Strong-Wolfe line search, bracket + zoom (cubic-free bisection zoom keeps
// it short and is robust enough for the smooth objectives used here).
// Returns step length, or 0 on failure.
inline double wolfe_line_search(const Objective& f, const Vec& x0, double f0,
                                const Vec& g0, const Vec& dir, Vec& x_out,
                                double& f_out, Vec& g_out, const LbfgsOptions& opt) {
    const double d0 = g0.dot(dir);
    if (d0 >= 0.0) return 0.0;  // not a descent direction

    auto eval = [&](double a, double& fv, Vec& gv) {
        x_out = x0 + a * dir;
        fv = f(x_out, gv);
        return std::isfinite(fv);
    };

    auto zoom = [&](double lo, double flo, double hi) {
        double fv;
        Vec gv(x0.size());
        for (int k = 0; k < opt.max_line_search; ++k) {
            double a = 0.5 * (lo + hi);
            if (!eval(a, fv, gv)) { hi = a; continue; }
            if (fv > f0 + opt.wolfe_c1 * a * d0 || fv >= flo) {
                hi = a;
            } else {
                double da = gv.dot(dir);
                if (std::abs(da) <= -opt.wolfe_c2 * d0) {
                    f_out = fv; g_out = gv;
                    return a;
                }
                if (da * (hi - lo) >= 0.0) hi = lo;
                lo = a; flo = fv;
            }
        }
        // fall back to the best admissible point found
        if (eval(lo, fv, gv) && fv < f0) { f_out = fv; g_out = gv; return lo; }
        return 0.0;
    };

    double a_prev = 0.0, f_prev = f0;
    double a = 1.0;
    double fv;
    Vec gv(x0.size());
    for (int k = 0; k < opt.max_line_search; ++k) {
        if (!eval(a, fv, gv)) { a = 0.5 * (a_prev + a); continue; }
        if (fv > f0 + opt.wolfe_c1 * a * d0 || (k > 0 && fv >= f_prev)) {
            return zoom(a_prev, f_prev, a);
        }
        double da = gv.dot(dir);
        if (std::abs(da) <= -opt.wolfe_c2 * d0) {
            f_out = fv; g_out = gv;
            return a;
        }
        if (da >= 0.0) return zoom(a, fv, a_prev);
        a_prev = a; f_prev = fv;
        a *= 2.0;
    }
    return 0.0;
}

// Strong-Wolfe search that screens candidates with value-only probes: the
// gradient is computed only for steps that already satisfy Armijo, so the
// shrinking phase (where most candidates die) never pays for it. If the
// curvature condition is never met within budget, the best Armijo point is
// still usable; the caller's update guard drops any bad curvature pair.
// Returns step length, or 0 on failure.
inline double backtracking_line_search(const Objective& f, const ValueObjective& fval,
                                       const Vec& x0, double f0, const Vec& g0,
                                       const Vec& dir, Vec& x_out, double& f_out,
                                       Vec& g_out, const LbfgsOptions& opt) {
    const double d0 = g0.dot(dir);
    if (d0 >= 0.0) return 0.0;  // not a descent direction

    double lo = 0.0;   // longest step passing Armijo with negative slope
    double hi = 0.0;   // shortest step known to fail Armijo or overshoot; 0 = unbounded
    double a = 1.0;
    double a_best = 0.0, f_best = f0;
    Vec g_best;
    for (int k = 0; k < opt.max_line_search; ++k) {
        x_out = x0 + a * dir;
        const double fv = fval(x_out);
        const bool armijo = std::isfinite(fv) && fv <= f0 + opt.wolfe_c1 * a * d0;
        if (armijo) {
            f_out = f(x_out, g_out);
            if (std::isfinite(f_out) && g_out.allFinite()) {
                if (a_best == 0.0 || f_out < f_best) {
                    a_best = a;
                    f_best = f_out;
                    g_best = g_out;
                }
                const double da = g_out.dot(dir);
                if (std::abs(da) <= -opt.wolfe_c2 * d0) return a;
                if (da < 0.0) {  // still descending: lengthen
                    lo = a;
                    a = hi > 0.0 ? 0.5 * (a + hi) : 2.0 * a;
                    continue;
                }
            }
        }
        hi = a;  // failed Armijo or overshot the minimum along dir
        a = 0.5 * (lo + a);
    }
    if (a_best > 0.0) {
        x_out = x0 + a_best * dir;
        f_out = f_best;
        g_out = g_best;
        return a_best;
    }
    return 0.0;
}

}  // namespace detail

// Single L-BFGS run (two-loop recursion). Throws NonFiniteObjective if the
// starting point is not evaluable. When a value-only callback is supplied the
// line search probes with it and takes the gradient only at accepted points.
inline LbfgsResult lbfgs_minimize(const Objective& f, const Vec& x0,
                                  const LbfgsOptions& opt = {},
                                  const ValueObjective& fval = {}) {
    const Eigen::Index n = x0.size();
    LbfgsResult res;
    res.x = x0;
    Vec g(n);
    res.f = f(res.x, g);
    if (!std::isfinite(res.f) || !g.allFinite())
        throw NonFiniteObjective("objective not finite at starting point");
    res.grad_norm = g.norm();

    std::deque<Vec> s_hist, y_hist;
    std::deque<double> rho_hist;

    Vec x_new(n), g_new(n);
    double f_new;
    for (int it = 0; it < opt.max_iterations; ++it) {
        if (res.grad_norm <= opt.grad_tolerance) { res.converged = true; break; }
        res.iterations = it + 1;

        // two-loop recursion
        Vec q = g;
        const int m = static_cast<int>(s_hist.size());
        std::vector<double> alpha(m);
        for (int i = m - 1; i >= 0; --i) {
            alpha[i] = rho_hist[i] * s_hist[i].dot(q);
            q -= alpha[i] * y_hist[i];
        }
        if (m > 0) {
            double gamma = s_hist[m - 1].dot(y_hist[m - 1]) / y_hist[m - 1].squaredNorm();
            q *= gamma;
        }
        for (int i = 0; i < m; ++i) {
            double beta = rho_hist[i] * y_hist[i].dot(q);
            q += (alpha[i] - beta) * s_hist[i];
        }
        Vec dir = -q;

        auto search = [&](const Vec& direction) {
            return fval ? detail::backtracking_line_search(f, fval, res.x, res.f, g, direction,
                                                           x_new, f_new, g_new, opt)
                        : detail::wolfe_line_search(f, res.x, res.f, g, direction, x_new, f_new,
                                                    g_new, opt);
        };
        double step = search(dir);
        if (step == 0.0) {
            // retry with steepest descent before giving up
            dir = -g;
            step = search(dir);
            if (step == 0.0) break;
        }

        Vec s = x_new - res.x;
        Vec y = g_new - g;
        double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            s_hist.push_back(std::move(s));
            y_hist.push_back(std::move(y));
            rho_hist.push_back(1.0 / sy);
            if (static_cast<int>(s_hist.size()) > opt.memory) {
                s_hist.pop_front(); y_hist.pop_front(); rho_hist.pop_front();
            }
        }
        res.x = x_new;
        res.f = f_new;
        g = g_new;
        res.grad_norm = g.norm();
    }
    if (res.grad_norm <= opt.grad_tolerance) res.converged = true;
    return res;
}

// Best-of-restarts minimization. Restart 0 starts from x0; the rest draw
// each coordinate uniformly over [init_lo, init_hi] (callers pass log-space
// bounds for positive hyperparameters). A restart whose starting point is
// not evaluable is skipped, not fatal; if every restart fails the error
// propagates.
inline LbfgsResult lbfgs_multistart(const Objective& f, const Vec& x0, int restarts,
                                    Rng& rng, const Vec& init_lo, const Vec& init_hi,
                                    const LbfgsOptions& opt = {},
                                    const ValueObjective& fval = {}) {
    if (init_lo.size() != x0.size() || init_hi.size() != x0.size())
        throw DimensionMismatch("lbfgs_multistart: bounds size");
    LbfgsResult best;
    bool any = false;
    for (int r = 0; r < std::max(restarts, 1); ++r) {
        Vec start = x0;
        if (r > 0)
            for (Eigen::Index i = 0; i < start.size(); ++i)
                start(i) = rng.uniform(init_lo(i), init_hi(i));
        try {
            LbfgsResult res = lbfgs_minimize(f, start, opt, fval);
            if (!any || res.f < best.f) { best = std::move(res); any = true; }
        } catch (const NonFiniteObjective&) {
            // skip this restart
        }
    }
    if (!any) throw NonFiniteObjective("all restarts failed with non-finite objectives");
    return best;
}

}  // namespace propsurro
