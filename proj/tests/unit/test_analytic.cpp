#include <cmath>

#include "doctest.h"
#include "fixtures/oracle_fixtures.hpp"
#include "mangled/analytic.hpp"
#include "mangled/errors.hpp"
#include "mangled/quadrature.hpp"
#include "mangled/special_functions.hpp"

using namespace mangled;
using analytic::MeasureFraction;

namespace {
double integrate_linear(const std::function<double(double)>& f, double a, double b) {
  return quad::integrate(f, a, b, 1e-12).value;
}
}  // namespace

TEST_CASE("mu0 total count and measure") {
  const DiffusionParams dp(1.0, 0.5, 0.1);
  const double t = 2.0;
  const double s = std::sqrt(dp.w() * t);
  const double count =
      integrate_linear([&](double x) { return analytic::mu0(x, t, dp).value(); }, -dp.v() * t - 15 * s, -dp.v() * t + 15 * s);
  CHECK(count == doctest::Approx(std::exp(1.5)).epsilon(1e-8));
  const double measure = integrate_linear([&](double x) { return std::exp(x) * analytic::mu0(x, t, dp).value(); },
                                          -dp.v() * t - 15 * s, -dp.v() * t + 15 * s);
  CHECK(measure == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("mu0 mode sits at -vt") {
  const DiffusionParams dp(1.3, 0.4, 0.1);
  const double t = 3.0;
  const double mode = -dp.v() * t;
  const double at = analytic::mu0(mode, t, dp).log_magnitude();
  CHECK(analytic::mu0(mode + 1e-3, t, dp).log_magnitude() < at);
  CHECK(analytic::mu0(mode - 1e-3, t, dp).log_magnitude() < at);
  CHECK_THROWS_AS(analytic::mu0(0.0, 0.0, dp), DomainError);
  CHECK_THROWS_AS(analytic::mu0(0.0, 1.0, DiffusionParams(1.0, 0.0, 0.1)), DomainError);
}

TEST_CASE("mu0 satisfies the drift-diffusion equation") {
  const DiffusionParams dp(1.0, 0.5, 0.1);
  CHECK(std::fabs(analytic::pde_residual_mu0(-1.0, 1.0, dp, 1e-4)) <= 1e-5);
  CHECK(std::fabs(analytic::pde_residual_mu0(-1.0, 1.0, dp, 1e-4, analytic::MeanSign::PlusVt)) >= 0.1);
}

TEST_CASE("mu0 residual shrinks as h^2") {
  const DiffusionParams dp(1.0, 0.5, 0.1);
  const double r1 = std::fabs(analytic::pde_residual_mu0(-0.4, 1.0, dp, 4e-2));
  const double r2 = std::fabs(analytic::pde_residual_mu0(-0.4, 1.0, dp, 2e-2));
  CHECK(r1 > 0.0);
  CHECK(r1 / r2 == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("boundary trajectory") {
  CHECK(analytic::boundary(0.0, DiffusionParams(1.0, 0.5, 0.1)) == -0.1);
  for (double t : {0.0, 1.0, 1e6}) CHECK(analytic::boundary(t, DiffusionParams(0.5, 0.5, 0.2)) == -0.2);
  CHECK(analytic::boundary(2.0, DiffusionParams(1.0, 0.5, 0.1)) == doctest::Approx(-1.1).epsilon(1e-15));
}

TEST_CASE("mu1 vanishes on the boundary and is nonnegative") {
  const DiffusionParams dp(1.0, 0.5, 0.1);
  for (double t : {0.5, 4.0, 100.0}) {
    CHECK(analytic::mu1_exact(0.0, t, dp).is_zero());
    CHECK(analytic::mu1_approx(0.0, t, dp).is_zero());
    for (double y = 0.01; y < 20.0; y *= 1.7) {
      CHECK(analytic::mu1_exact(y, t, dp).sign() == 1);
      CHECK(analytic::mu1_approx(y, t, dp).sign() == 1);
    }
  }
  CHECK_THROWS_AS(analytic::mu1_exact(-0.1, 1.0, dp), DomainError);
  CHECK_THROWS_AS(analytic::mu1_approx(-0.1, 1.0, dp), DomainError);
}

TEST_CASE("mu1_exact against the approximation for small eps") {
  const DiffusionParams dp(1.0, 0.5, 0.1);
  const double t = 4.0;
  for (double y = 0.5; y <= 4.0; y += 0.25) {
    // The prefactor of mu1_exact is pi times the approximation's.
    const double ratio = (analytic::mu1_exact(y, t, dp) / analytic::mu1_approx(y, t, dp)).value() / M_PI;
    INFO("y = " << y);
    CHECK(ratio >= 0.99);
    CHECK(ratio <= 1.01);
  }
}

TEST_CASE("mu1_approx mode") {
  CHECK(analytic::mu1_approx_mode(2.0) == doctest::Approx(std::sqrt(3.0) - 1.0).epsilon(1e-12));
  CHECK(analytic::mu1_approx_mode(2.0) == doctest::Approx(0.7321).epsilon(1e-4));
  const DiffusionParams dp(1.0, 0.5, 0.1);
  const double t = 4.0;
  const double m = analytic::mu1_approx_mode(dp.w() * t);
  const double at = analytic::mu1_approx(m, t, dp).log_magnitude();
  CHECK(analytic::mu1_approx(m + 1e-3, t, dp).log_magnitude() < at);
  CHECK(analytic::mu1_approx(m - 1e-3, t, dp).log_magnitude() < at);
}

TEST_CASE("W is the integral of mu1_approx") {
  const DiffusionParams dp(1.0, 0.5, 0.1);
  for (double wt : {1.0, 4.0, 25.0}) {
    const double t = wt / dp.w();
    const LogValue w = analytic::unmangled_count_W(t, dp);
    const double q = integrate_linear(
        [&](double y) { return std::exp(analytic::mu1_approx(y, t, dp).log_magnitude() - w.log_magnitude()); }, 0.0,
        quad::tail_cutoff(wt, dp.eps()));
    CHECK(q == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("W log-slope tracks v - w") {
  auto slope = [](const DiffusionParams& dp) {
    const double t = 100.0 / dp.w();
    const double h = 1e-3 * t;
    return (analytic::unmangled_count_W(t + h, dp).log_magnitude() -
            analytic::unmangled_count_W(t - h, dp).log_magnitude()) / (2 * h);
  };
  CHECK(slope(DiffusionParams(1.0, 0.5, 0.1)) > 0.0);
  CHECK(slope(DiffusionParams(0.4, 0.5, 0.1)) < 0.0);
  CHECK_THROWS_AS(analytic::unmangled_count_W(0.0, DiffusionParams(1.0, 0.5, 0.1)), DomainError);
}

TEST_CASE("W at wt = 1e10") {
  const DiffusionParams dp(2.0, 1.0, 0.1);
  const double t = 1e10;
  const LogValue w = analytic::unmangled_count_W(t, dp);
  REQUIRE(w.is_finite());
  double bracket = 0.0;
  for (const auto& p : fixtures::kBracket) {
    if (p.x == 1e10) bracket = p.value;
  }
  REQUIRE(bracket > 0.0);
  const double expected =
      std::log(dp.eps() * std::exp(dp.eps()) / 2.0) + (dp.v() - dp.w()) * t + std::log(bracket);
  CHECK(std::fabs(w.log_magnitude() - expected) <= 1e-5);
}

TEST_CASE("lambda is linear in G and reduces to gamma") {
  const DiffusionParams dp(1.0, 0.5, 0.1);
  const MeasureFraction f = MeasureFraction::from_value(0.3);
  const LogValue l1 = analytic::lambda_count(f, 1.0, 10.0, 40.0, dp);
  const LogValue l5 = analytic::lambda_count(f, 5.0, 10.0, 40.0, dp);
  CHECK((l5 / l1).value() == doctest::Approx(5.0).epsilon(1e-14));

  const LogValue unit = analytic::lambda_count(MeasureFraction::unit(), 1.0, 10.0, 40.0, dp);
  for (double log_f : {0.0, -0.5, -3.0, -30.0}) {
    for (double g : {1.0, 2.0, 17.0}) {
      const MeasureFraction ff = MeasureFraction::from_log(log_f);
      const LogValue l = analytic::lambda_count(ff, g, 10.0, 40.0, dp);
      const double log_gamma = l.log_magnitude() - log_f - std::log(g) - unit.log_magnitude();
      CHECK(log_gamma == doctest::Approx(std::log(analytic::gamma_correction(ff, 10.0, dp.w()))).epsilon(1e-12));
    }
  }
}

TEST_CASE("lambda closed form vs quadrature") {
  const DiffusionParams dp(1.0, 0.5, 0.05);
  const MeasureFraction f = MeasureFraction::from_value(0.25);
  const double t1 = 50.0;
  const double t2 = 800.0;
  const LogValue closed = analytic::lambda_count(f, 4.0, t1, t2, dp);
  const double q = integrate_linear(
      [&](double y) {
        if (!(y > 0.0)) return 0.0;
        const double l = std::log(4.0) + analytic::unmangled_count_from(y, t2, dp).log_magnitude() +
                         analytic::mu1_approx(y - f.log(), t1, dp).log_magnitude();
        return std::exp(l - closed.log_magnitude());
      },
      0.0, quad::tail_cutoff(dp.w() * t1, dp.eps()));
  CHECK(q == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("measure fraction domain") {
  CHECK_THROWS_AS(MeasureFraction::from_value(1.5), DomainError);
  CHECK_THROWS_AS(MeasureFraction::from_value(0.0), DomainError);
  CHECK_THROWS_AS(MeasureFraction::from_log(0.1), DomainError);
  CHECK(MeasureFraction::from_log(-1e5).log() == -1e5);
  CHECK(MeasureFraction::from_log(-1e5).value() == 0.0);
  const DiffusionParams dp(1.0, 0.5, 0.1);
  CHECK_THROWS_AS(analytic::lambda_count(MeasureFraction::unit(), 0.5, 1.0, 1.0, dp), DomainError);
}

TEST_CASE("gamma examples") {
  CHECK(analytic::gamma_correction(MeasureFraction::unit(), 7.0, 0.3) == 1.0);
  const double headline = analytic::gamma_correction(MeasureFraction::from_log(-1e5), 1e10, 1.0);
  CHECK(headline == doctest::Approx(fixtures::kErfcInvSqrt2).epsilon(1e-12));
  const double half = analytic::gamma_correction(MeasureFraction::from_value(0.5), 1e10, 1.0);
  CHECK(1.0 - half == doctest::Approx(fixtures::kOneMinusGammaHalf).epsilon(1e-6));
  CHECK(1.0 - half < 1e-5);
}

TEST_CASE("gamma monotonicity") {
  double prev = 0.0;
  for (double log_f = -50.0; log_f <= 0.0; log_f += 0.5) {
    const double g = analytic::gamma_correction(MeasureFraction::from_log(log_f), 10.0, 1.0);
    CHECK(g >= prev);
    CHECK(g > 0.0);
    CHECK(g <= 1.0);
    prev = g;
  }
  prev = 0.0;
  for (double wt = 0.1; wt < 1e12; wt *= 3.0) {
    const double g = analytic::gamma_correction(MeasureFraction::from_log(-3.0), wt, 1.0);
    CHECK(g >= prev);
    prev = g;
  }
  CHECK(prev == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("regime warnings") {
  Diagnostics d;
  analytic::check_born_regime(0.1, 100.0, &d);
  CHECK(d.empty());
  analytic::check_born_regime(5.0, 100.0, &d);
  CHECK(d.warnings.size() == 1);
  analytic::check_born_regime(0.01, 0.5, &d);
  CHECK(d.warnings.size() >= 2);
  Diagnostics g;
  analytic::gamma_correction(MeasureFraction::from_value(0.5), 0.5, 1.0, &g);
  CHECK_FALSE(g.empty());
}

TEST_CASE("world distribution dispatch") {
  const DiffusionParams dp(1.0, 0.5, 0.1);
  const analytic::WorldDistribution all{analytic::DistributionKind::AllWorlds, dp, 2.0};
  CHECK(all.density(-2.0) == analytic::mu0(-2.0, 2.0, dp));
  const analytic::WorldDistribution ex{analytic::DistributionKind::UnmangledExact, dp, 2.0};
  CHECK(ex.density(1.0) == analytic::mu1_exact(1.0, 2.0, dp));
  const analytic::WorldDistribution ap{analytic::DistributionKind::UnmangledApprox, dp, 2.0};
  CHECK(ap.density(1.0) == analytic::mu1_approx(1.0, 2.0, dp));
}
