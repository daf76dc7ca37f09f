#pragma once

#include <functional>

#include "wgs/types.hpp"

namespace wgs {

enum class LbfgsStatus { converged, max_iterations, line_search_failed, stalled, gradient_failed };

const char* to_string(LbfgsStatus status);

struct LbfgsOptions {
    int max_iterations = 200;
    int memory = 8;
    double gradient_tolerance = 1e-7;
    /// Stop when the relative decrease over the last `value_window` accepted
    /// steps falls below this.
    double value_tolerance = 1e-14;
    int value_window = 10;
    int max_backtracks = 40;
};

struct LbfgsResult {
    RVector x;
    double value = 0.0;
    double gradient_norm = 0.0;
    int iterations = 0;
    LbfgsStatus status = LbfgsStatus::max_iterations;
};

/// Objective values that are not finite, or that throw NumericRangeError,
/// count as +infinity during the line search.
using ObjectiveFn = std::function<double(const RVector&)>;
using GradientFn = std::function<RVector(const RVector&)>;
/// Called after every accepted step with (iteration, value, gradient norm).
using IterationFn = std::function<void(int, double, double)>;

/// Limited-memory BFGS with Armijo backtracking. Accepted steps strictly
/// decrease the objective; the returned point is the best one seen.
LbfgsResult lbfgs_minimize(const ObjectiveFn& f, const GradientFn& grad, RVector x0, const LbfgsOptions& options = {},
                           const IterationFn& on_iteration = {});

}  // namespace wgs
