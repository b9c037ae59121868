#pragma once

#include "mangled/diagnostics.hpp"
#include "mangled/log_value.hpp"
#include "mangled/model_params.hpp"

// Closed forms of the growth-drift-diffusion-absorption model.
//
// Coordinates: x = ln m is world log-size; y = x - x_b(t) is log-size measured
// from the absorbing boundary x_b(t) = -(v-w)t - eps. Densities are numbers of
// worlds per unit log-size; all count-like results are LogValues.
//
// Mean convention for mu0: the all-worlds density is centred at -vt, the
// median world. A Gaussian centred at +vt does not satisfy the
// growth-drift-diffusion equation; pde_residual_mu0 exists to show that, and
// MeanSign::PlusVt is kept only as the negative control.
//
// Normalization: mu1_approx, unmangled_count_W and lambda_count describe an
// initial condition carrying mass kClosedFormInitialMass in y (a unit delta in
// the doubled coordinate z = 2y). A unit-mass start produces exactly twice
// these values; ratios such as gamma are unaffected. mu1_exact keeps its
// sqrt(pi/(8wt)) prefactor, which is pi times that normalization.
namespace mangled::analytic {

inline constexpr double kClosedFormInitialMass = 0.5;

// A measure fraction F in (0, 1], held as ln F so that F = e^{-1e5} is
// representable.
class MeasureFraction {
 public:
  static MeasureFraction from_value(double f);
  static MeasureFraction from_log(double log_f);
  static MeasureFraction unit() { return from_log(0.0); }

  double log() const { return log_f_; }
  double value() const;

 private:
  explicit MeasureFraction(double log_f) : log_f_(log_f) {}
  double log_f_;
};

enum class MeanSign { MinusVt, PlusVt };

enum class DistributionKind { AllWorlds, UnmangledExact, UnmangledApprox };

struct WorldDistribution {
  DistributionKind kind;
  DiffusionParams params;
  double t;

  // Evaluates at x for AllWorlds, at y otherwise.
  LogValue density(double coord) const;
};

// All-worlds density: normal in x with mean -vt and variance wt, times the
// total world count e^{(v-w/2)t}. Requires t > 0, w > 0.
LogValue mu0(double x, double t, const DiffusionParams& dp, MeanSign sign = MeanSign::MinusVt);

// Central-difference residual of mu_t - v(mu_x + mu) - (w/2)(mu_xx - mu),
// divided by mu. Derivatives are taken on ratios mu(.)/mu(x,t) so the result
// is independent of the overall scale.
double pde_residual_mu0(double x, double t, const DiffusionParams& dp, double h = 1e-4,
                        MeanSign sign = MeanSign::MinusVt);

// x_b(t) = -(v-w)t - eps.
double boundary(double t, const DiffusionParams& dp);

// Image-method solution with prefactor sqrt(pi/(8wt)). y >= 0, t > 0.
LogValue mu1_exact(double y, double t, const DiffusionParams& dp);

// Small-eps approximation. y >= 0, t > 0; accurate when eps << sqrt(wt).
LogValue mu1_approx(double y, double t, const DiffusionParams& dp);

// Maximizer in y of mu1_approx at fixed wt.
double mu1_approx_mode(double wt);

// W(t; eps) = integral of mu1_approx over y >= 0, in closed form.
LogValue unmangled_count_W(double t, const DiffusionParams& dp);

// W with the starting offset eps replaced by y0.
LogValue unmangled_count_from(double y0, double t, const DiffusionParams& dp);

// lambda(F, G; t1, t2, eps): expected unmangled count at t1 + t2 after every
// world is split at t1 into G children each a factor F smaller.
LogValue lambda_count(MeasureFraction f, double g, double t1, double t2, const DiffusionParams& dp,
                      Diagnostics* diag = nullptr);

// gamma(F) = erfc(-ln F / sqrt(2 w t1)), the Born-rule correction factor.
double gamma_correction(MeasureFraction f, double t1, double w, Diagnostics* diag = nullptr);

// Adds a warning when eps >= 0.3 sqrt(w t1) or w t1 <= 1.
void check_born_regime(double eps, double wt1, Diagnostics* diag);

}  // namespace mangled::analytic
