#include "mangled/tridiagonal.hpp"

#include <cmath>

#include "mangled/errors.hpp"

namespace mangled {

TridiagonalSolver::TridiagonalSolver(std::span<const double> lower, std::span<const double> diag,
                                     std::span<const double> upper)
    : lower_(lower.begin(), lower.end()), upper_star_(diag.size()), inv_pivot_(diag.size()) {
  const std::size_t n = diag.size();
  if (n == 0 || lower.size() != n || upper.size() != n) {
    throw DomainError("TridiagonalSolver: bands must be non-empty and of equal length");
  }
  double prev_upper_star = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lo = i == 0 ? 0.0 : lower[i];
    const double pivot = diag[i] - lo * prev_upper_star;
    if (pivot == 0.0 || !std::isfinite(pivot)) {
      throw NumericalFailure("TridiagonalSolver: zero pivot");
    }
    inv_pivot_[i] = 1.0 / pivot;
    upper_star_[i] = i + 1 < n ? upper[i] * inv_pivot_[i] : 0.0;
    prev_upper_star = upper_star_[i];
  }
  lower_[0] = 0.0;
}

void TridiagonalSolver::solve(std::span<double> rhs) const {
  const std::size_t n = inv_pivot_.size();
  rhs[0] *= inv_pivot_[0];
  for (std::size_t i = 1; i < n; ++i) {
    rhs[i] = (rhs[i] - lower_[i] * rhs[i - 1]) * inv_pivot_[i];
  }
  for (std::size_t i = n - 1; i-- > 0;) {
    rhs[i] -= upper_star_[i] * rhs[i + 1];
  }
}

}  // namespace mangled
