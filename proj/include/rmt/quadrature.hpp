#pragma once

#include <functional>

#include "rmt/common.hpp"

namespace rmt {

/// Adaptive Simpson integration of f on [a, b] to absolute tolerance tol.
/// Throws QuadratureError if the recursion depth limit is reached before the
/// tolerance is met anywhere.
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol, int max_depth = 48);

}  // namespace rmt
