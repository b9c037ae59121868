#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mangled/analytic.hpp"
#include "mangled/log_value.hpp"
#include "mangled/monte_carlo.hpp"

// Independent oracles and the cross-engine acceptance suite.
namespace mangled::validation {

// Integral of exp(log_f) over [a, b], factoring out the largest value seen on
// a coarse scan so integrands far outside double range are fine.
LogValue integrate_log(const std::function<double(double)>& log_f, double a, double b, double rel_tol = 1e-12);

// ln P(survive to time t) for dY = -w dt + sqrt(w) dB started at y0 > 0 and
// absorbed at 0; depends on w t only.
double log_survival(double y0, double wt);

// ln of the image-method density of the same process at time t (unit initial
// mass at eps), y > 0.
double log_image_density(double y, double eps, double wt);

// gamma(F) of the continuum model without the small-eps and large-t2
// approximations: integral of the stage-one density times the stage-two
// survival probability from the shifted start.
double exact_continuum_gamma(analytic::MeasureFraction f, double eps, double wt1, double wt2);

// Exact expectation and estimator variances of the branching walk, by
// dynamic programming over (n, k).
struct WalkMoments {
  LogValue mean;                     // expected unmangled count (times G)
  double relative_variance_none;     // Var / mean^2 per path, counting sampler
  double relative_variance_measure;  // same, measure-tilted sampler
};

WalkMoments exact_walk_moments(const mc::WalkSpec& spec);

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  std::vector<std::string> details;
  double seconds = 0.0;

  // "PASS <id> <title>" or "FAIL ...".
  std::string line() const;
};

struct SuiteOptions {
  unsigned workers = 0;
  std::uint64_t seed = 20240611;
  std::uint64_t gamma_paths = 10'000'000;  // pooled, per F value
  double pde_dt = 0.01;
  int pde_cells = 4096;
};

inline constexpr int kCriterionCount = 10;

CriterionResult run_criterion(int id, const SuiteOptions& options = {});

// Runs the given criteria (all when empty), calling report after each.
std::vector<CriterionResult> run_suite(const std::vector<int>& ids, const SuiteOptions& options,
                                       const std::function<void(const CriterionResult&)>& report = {});

}  // namespace mangled::validation
