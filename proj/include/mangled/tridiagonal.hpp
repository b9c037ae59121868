#pragma once

#include <span>
#include <vector>

namespace mangled {

// Thomas algorithm for a fixed tridiagonal matrix, factorized once and
// applied to many right-hand sides. No pivoting: the matrix must be
// diagonally dominant (true for every implicit diffusion operator here).
class TridiagonalSolver {
 public:
  TridiagonalSolver() = default;
  // lower[0] and upper[n-1] are ignored.
  TridiagonalSolver(std::span<const double> lower, std::span<const double> diag,
                    std::span<const double> upper);

  std::size_t size() const { return inv_pivot_.size(); }

  // Solves in place: rhs is overwritten with the solution.
  void solve(std::span<double> rhs) const;

 private:
  std::vector<double> lower_;
  std::vector<double> upper_star_;
  std::vector<double> inv_pivot_;
};

}  // namespace mangled
