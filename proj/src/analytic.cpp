#include "mangled/analytic.hpp"

#include <cmath>
#include <sstream>

#include "mangled/errors.hpp"
#include "mangled/special_functions.hpp"

namespace mangled::analytic {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

void require_positive_time(double t, const char* who) {
  if (!(t > 0.0) || !std::isfinite(t)) {
    throw DomainError(std::string(who) + ": t must be > 0 (the initial delta is not representable)");
  }
}

void require_unmangled(double y, const char* who) {
  if (!(y >= 0.0)) throw DomainError(std::string(who) + ": y must be >= 0");
}

double log_mu0(double x, double t, const DiffusionParams& dp, MeanSign sign) {
  const double wt = dp.w() * t;
  const double mean = sign == MeanSign::MinusVt ? -dp.v() * t : dp.v() * t;
  const double d = x - mean;
  return (dp.v() - 0.5 * dp.w()) * t - 0.5 * (kLog2Pi + std::log(wt)) - d * d / (2.0 * wt);
}

}  // namespace

MeasureFraction MeasureFraction::from_value(double f) {
  if (!(f > 0.0 && f <= 1.0)) throw DomainError("MeasureFraction: F must lie in (0, 1]");
  return MeasureFraction(std::log(f));
}

MeasureFraction MeasureFraction::from_log(double log_f) {
  if (!(log_f <= 0.0) || !std::isfinite(log_f)) {
    throw DomainError("MeasureFraction: ln F must be finite and <= 0");
  }
  return MeasureFraction(log_f);
}

double MeasureFraction::value() const { return std::exp(log_f_); }

LogValue WorldDistribution::density(double coord) const {
  switch (kind) {
    case DistributionKind::AllWorlds:
      return mu0(coord, t, params);
    case DistributionKind::UnmangledExact:
      return mu1_exact(coord, t, params);
    case DistributionKind::UnmangledApprox:
      return mu1_approx(coord, t, params);
  }
  throw DomainError("WorldDistribution: unknown kind");
}

LogValue mu0(double x, double t, const DiffusionParams& dp, MeanSign sign) {
  require_positive_time(t, "mu0");
  dp.require_diffusive("mu0");
  return LogValue::from_log(log_mu0(x, t, dp, sign));
}

double pde_residual_mu0(double x, double t, const DiffusionParams& dp, double h, MeanSign sign) {
  require_positive_time(t - h, "pde_residual_mu0");
  dp.require_diffusive("pde_residual_mu0");
  const double l0 = log_mu0(x, t, dp, sign);
  const double dxp = std::expm1(log_mu0(x + h, t, dp, sign) - l0);
  const double dxm = std::expm1(log_mu0(x - h, t, dp, sign) - l0);
  const double dtp = std::expm1(log_mu0(x, t + h, dp, sign) - l0);
  const double dtm = std::expm1(log_mu0(x, t - h, dp, sign) - l0);

  const double mu_t = (dtp - dtm) / (2.0 * h);
  const double mu_x = (dxp - dxm) / (2.0 * h);
  const double mu_xx = (dxp + dxm) / (h * h);
  return mu_t - dp.v() * (mu_x + 1.0) - 0.5 * dp.w() * (mu_xx - 1.0);
}

double boundary(double t, const DiffusionParams& dp) {
  if (!(t >= 0.0)) throw DomainError("boundary: t must be >= 0");
  return -(dp.v() - dp.w()) * t - dp.eps();
}

LogValue mu1_exact(double y, double t, const DiffusionParams& dp) {
  require_unmangled(y, "mu1_exact");
  require_positive_time(t, "mu1_exact");
  dp.require_diffusive("mu1_exact");
  const double wt = dp.w() * t;
  const double eps = dp.eps();
  const LogValue near = LogValue::from_log(-(y - eps) * (y - eps) / (2.0 * wt));
  const LogValue far = LogValue::from_log(-(y + eps) * (y + eps) / (2.0 * wt));
  const LogValue images = log_diff_exp(near, far);
  const double log_pref = 0.5 * std::log(M_PI / (8.0 * wt)) + eps - y + (dp.v() - dp.w()) * t;
  return LogValue::from_log(log_pref) * images;
}

LogValue mu1_approx(double y, double t, const DiffusionParams& dp) {
  require_unmangled(y, "mu1_approx");
  require_positive_time(t, "mu1_approx");
  dp.require_diffusive("mu1_approx");
  if (y == 0.0) return LogValue::zero();
  const double wt = dp.w() * t;
  const double eps = dp.eps();
  return LogValue::from_log(std::log(eps) + eps - 0.5 * kLog2Pi + (dp.v() - dp.w()) * t -
                            1.5 * std::log(wt) + std::log(y) - y - y * y / (2.0 * wt));
}

double mu1_approx_mode(double wt) {
  if (!(wt > 0.0)) throw DomainError("mu1_approx_mode: wt must be > 0");
  // Positive root of y^2 + wt y - wt = 0, written to avoid cancellation.
  return 2.0 * wt / (wt + std::sqrt(wt * wt + 4.0 * wt));
}

LogValue unmangled_count_from(double y0, double t, const DiffusionParams& dp) {
  if (!(y0 > 0.0)) throw DomainError("unmangled_count_from: starting offset must be > 0");
  require_positive_time(t, "unmangled_count_W");
  dp.require_diffusive("unmangled_count_W");
  const double log_pref = std::log(0.5 * y0) + y0 + (dp.v() - dp.w()) * t;
  return LogValue::from_log(log_pref) * special::bracket(dp.w() * t);
}

LogValue unmangled_count_W(double t, const DiffusionParams& dp) {
  return unmangled_count_from(dp.eps(), t, dp);
}

void check_born_regime(double eps, double wt1, Diagnostics* diag) {
  if (diag == nullptr) return;
  if (wt1 <= 1.0) {
    std::ostringstream os;
    os << "w t1 = " << wt1 << " is not >> 1; the closed form assumes many background events";
    diag->warn(os.str());
  }
  if (eps >= 0.3 * std::sqrt(wt1)) {
    std::ostringstream os;
    os << "eps = " << eps << " is not << sqrt(w t1) = " << std::sqrt(wt1);
    diag->warn(os.str());
  }
}

LogValue lambda_count(MeasureFraction f, double g, double t1, double t2, const DiffusionParams& dp,
                      Diagnostics* diag) {
  if (!(g >= 1.0)) throw DomainError("lambda_count: G must be >= 1");
  require_positive_time(t1, "lambda_count");
  require_positive_time(t2, "lambda_count");
  dp.require_diffusive("lambda_count");
  const double wt1 = dp.w() * t1;
  check_born_regime(dp.eps(), wt1, diag);
  const double eps = dp.eps();
  const double log_pref = f.log() + std::log(g) + special::log_erfc(-f.log() / std::sqrt(2.0 * wt1)) +
                          std::log(0.25 * eps) + eps + (dp.v() - dp.w()) * (t1 + t2);
  return LogValue::from_log(log_pref) * special::bracket(dp.w() * t2);
}

double gamma_correction(MeasureFraction f, double t1, double w, Diagnostics* diag) {
  const double wt1 = w * t1;
  if (!(wt1 > 0.0)) throw DomainError("gamma_correction: w t1 must be > 0");
  if (diag != nullptr && wt1 <= 1.0) check_born_regime(0.0, wt1, diag);
  return special::erfc(-f.log() / std::sqrt(2.0 * wt1));
}

}  // namespace mangled::analytic
