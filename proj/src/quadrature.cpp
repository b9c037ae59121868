#include "mangled/quadrature.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace mangled::quad {

Result integrate(const std::function<double(double)>& f, double a, double b, double rel_tol,
                 unsigned max_depth) {
  using Rule = boost::math::quadrature::gauss_kronrod<double, 61>;
  double err = 0.0;
  const double v = Rule::integrate(f, a, b, max_depth, rel_tol, &err);
  return {v, err};
}

double tail_cutoff(double wt, double shift) { return std::max(10.0, 8.0 * std::sqrt(wt)) + shift; }

}  // namespace mangled::quad
