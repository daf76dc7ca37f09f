#include "wgs/lbfgs.hpp"

#include <cmath>
#include <deque>
#include <limits>

#include "wgs/errors.hpp"

namespace wgs {

const char* to_string(LbfgsStatus status) {
    switch (status) {
        case LbfgsStatus::converged: return "converged";
        case LbfgsStatus::max_iterations: return "max_iterations";
        case LbfgsStatus::line_search_failed: return "line_search_failed";
        case LbfgsStatus::stalled: return "stalled";
        case LbfgsStatus::gradient_failed: return "gradient_failed";
    }
    return "unknown";
}

namespace {

double safe_value(const ObjectiveFn& f, const RVector& x) {
    try {
        const double v = f(x);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    } catch (const NumericRangeError&) {
        return std::numeric_limits<double>::infinity();
    }
}

}  // namespace

LbfgsResult lbfgs_minimize(const ObjectiveFn& f, const GradientFn& grad, RVector x0, const LbfgsOptions& opt,
                           const IterationFn& on_iteration) {
    if (opt.memory < 1 || opt.gradient_tolerance <= 0.0) throw ArgumentError("bad L-BFGS options");
    LbfgsResult res;
    res.x = std::move(x0);
    res.value = f(res.x);
    if (!std::isfinite(res.value)) throw NumericRangeError("objective is not finite at the starting point");
    if (res.x.size() == 0) {
        res.status = LbfgsStatus::converged;
        return res;
    }

    RVector g;
    try {
        g = grad(res.x);
    } catch (const NumericRangeError&) {
        res.status = LbfgsStatus::gradient_failed;
        return res;
    }
    res.gradient_norm = g.norm();

    std::deque<RVector> s_hist, y_hist;
    std::deque<double> rho_hist;
    std::deque<double> recent{res.value};

    for (int it = 0; it < opt.max_iterations; ++it) {
        if (res.gradient_norm < opt.gradient_tolerance) {
            res.status = LbfgsStatus::converged;
            return res;
        }

        // Two-loop recursion.
        RVector p = -g;
        std::vector<double> alpha(s_hist.size());
        for (int i = static_cast<int>(s_hist.size()) - 1; i >= 0; --i) {
            alpha[i] = rho_hist[i] * s_hist[i].dot(p);
            p -= alpha[i] * y_hist[i];
        }
        if (!s_hist.empty()) p *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
        for (std::size_t i = 0; i < s_hist.size(); ++i) {
            const double beta = rho_hist[i] * y_hist[i].dot(p);
            p += (alpha[i] - beta) * s_hist[i];
        }

        double slope = g.dot(p);
        if (!(slope < 0.0)) {
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
            p = -g;
            slope = -g.squaredNorm();
        }

        double t = s_hist.empty() ? std::min(1.0, 1.0 / res.gradient_norm) : 1.0;
        RVector x_new;
        double f_new = std::numeric_limits<double>::infinity();
        bool accepted = false;
        for (int bt = 0; bt < opt.max_backtracks; ++bt) {
            x_new = res.x + t * p;
            f_new = safe_value(f, x_new);
            if (f_new < res.value && f_new <= res.value + 1e-4 * t * slope) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) {
            if (!s_hist.empty()) {
                // Retry once along steepest descent before giving up.
                s_hist.clear();
                y_hist.clear();
                rho_hist.clear();
                continue;
            }
            res.status = LbfgsStatus::line_search_failed;
            return res;
        }

        RVector g_new;
        try {
            g_new = grad(x_new);
        } catch (const NumericRangeError&) {
            res.x = std::move(x_new);
            res.value = f_new;
            res.iterations = it + 1;
            res.status = LbfgsStatus::gradient_failed;
            return res;
        }

        RVector s = x_new - res.x;
        RVector y = g_new - g;
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            s_hist.push_back(std::move(s));
            y_hist.push_back(std::move(y));
            rho_hist.push_back(1.0 / sy);
            if (static_cast<int>(s_hist.size()) > opt.memory) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
        }

        res.x = std::move(x_new);
        res.value = f_new;
        g = std::move(g_new);
        res.gradient_norm = g.norm();
        res.iterations = it + 1;
        if (on_iteration) on_iteration(res.iterations, res.value, res.gradient_norm);

        recent.push_back(res.value);
        if (static_cast<int>(recent.size()) > opt.value_window) {
            recent.pop_front();
            if (recent.front() - res.value < opt.value_tolerance * std::max(1.0, std::abs(res.value))) {
                res.status = res.gradient_norm < opt.gradient_tolerance ? LbfgsStatus::converged : LbfgsStatus::stalled;
                return res;
            }
        }
    }
    res.status = res.gradient_norm < opt.gradient_tolerance ? LbfgsStatus::converged : LbfgsStatus::max_iterations;
    return res;
}

}  // namespace wgs
