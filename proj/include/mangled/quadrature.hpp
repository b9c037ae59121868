#pragma once

#include <functional>

namespace mangled::quad {

struct Result {
  double value;
  double error_estimate;
};

// Adaptive Gauss-Kronrod (61-point) on [a, b]; b may be +infinity.
Result integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol = 1e-12, unsigned max_depth = 30);

// Upper limit used for integrands that decay like e^{-y} times a Gaussian of
// variance wt: max(10, 8 sqrt(wt)) plus an optional shift.
double tail_cutoff(double wt, double shift = 0.0);

}  // namespace mangled::quad
