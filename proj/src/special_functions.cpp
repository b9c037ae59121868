#include "mangled/special_functions.hpp"

#include <array>
#include <cmath>

#include "mangled/errors.hpp"

namespace mangled::special {

namespace {

constexpr double kInvSqrtPi = 0.56418958354775628695;

// W. J. Cody, "Rational Chebyshev approximations for the error function",
// Math. Comp. 23 (1969). Coefficients as distributed in netlib specfun/erf.
constexpr std::array<double, 5> kErfA = {3.16112374387056560e00, 1.13864154151050156e02,
                                         3.77485237685302021e02, 3.20937758913846947e03,
                                         1.85777706184603153e-1};
constexpr std::array<double, 4> kErfB = {2.36012909523441209e01, 2.44024637934444173e02,
                                         1.28261652607737228e03, 2.84423683343917062e03};
constexpr std::array<double, 9> kErfcC = {
    5.64188496988670089e-1, 8.88314979438837594e00, 6.61191906371416295e01,
    2.98635138197400131e02, 8.81952221241769090e02, 1.71204761263407058e03,
    2.05107837782607147e03, 1.23033935479799725e03, 2.15311535474403846e-8};
constexpr std::array<double, 8> kErfcD = {
    1.57449261107098347e01, 1.17693950891312499e02, 5.37181101862009858e02,
    1.62138957456669019e03, 3.29079923573345963e03, 4.36261909014324716e03,
    3.43936767414372164e03, 1.23033935480374942e03};

// erf on |a| <= kErfRationalMax.
double erf_rational(double a) {
  const double ysq = a * a;
  double num = kErfA[4] * ysq;
  double den = ysq;
  for (int i = 0; i < 3; ++i) {
    num = (num + kErfA[i]) * ysq;
    den = (den + kErfB[i]) * ysq;
  }
  return a * (num + kErfA[3]) / (den + kErfB[3]);
}

// e^{-a^2} with a^2 split so the rounding of a*a is not amplified by exp.
double exp_neg_square(double a) {
  const double hi = std::trunc(a * 16.0) / 16.0;
  const double del = (a - hi) * (a + hi);
  return std::exp(-hi * hi) * std::exp(-del);
}

}  // namespace

namespace detail {

double erfcx_rational(double a) {
  double num = kErfcC[8] * a;
  double den = a;
  for (int i = 0; i < 7; ++i) {
    num = (num + kErfcC[i]) * a;
    den = (den + kErfcD[i]) * a;
  }
  return (num + kErfcC[7]) / (den + kErfcD[7]);
}

// erfcx(a) = 1 / (sqrt(pi) * f),  f = a + (1/2)/(a + (2/2)/(a + (3/2)/(a + ...))).
// Modified Lentz evaluation.
double erfcx_continued_fraction(double a) {
  constexpr double kTiny = 1e-300;
  constexpr double kEps = 1e-16;
  constexpr int kMaxTerms = 5000;
  double f = a;
  if (f == 0.0) f = kTiny;
  double c = f;
  double d = 0.0;
  for (int j = 1; j <= kMaxTerms; ++j) {
    const double aj = 0.5 * j;
    d = a + aj * d;
    if (d == 0.0) d = kTiny;
    c = a + aj / c;
    if (c == 0.0) c = kTiny;
    d = 1.0 / d;
    const double delta = c * d;
    f *= delta;
    if (std::fabs(delta - 1.0) < kEps) break;
  }
  return kInvSqrtPi / f;
}

double bracket_direct(double a) { return kInvSqrtPi / a - erfcx(a); }

// 1/(a sqrt(pi)) - erfcx(a) = (1/(a sqrt(pi))) * sum_{n>=1} (-1)^{n+1} (2n-1)!! / (2a^2)^n,
// summed up to (excluding) the smallest term.
double bracket_asymptotic(double a) {
  const double x = 1.0 / (2.0 * a * a);
  double term = x;  // n = 1
  double sum = 0.0;
  double prev = std::fabs(term) * 2.0;
  for (int n = 1; n < 200; ++n) {
    if (std::fabs(term) >= prev) break;
    sum += term;
    prev = std::fabs(term);
    term *= -(2.0 * n + 1.0) * x;
  }
  return kInvSqrtPi / a * sum;
}

}  // namespace detail

double erf(double a) {
  if (std::isnan(a)) return a;
  const double y = std::fabs(a);
  if (y <= kErfRationalMax) return erf_rational(a);
  const double r = 1.0 - erfc(y);
  return a < 0 ? -r : r;
}

double erfc(double a) {
  if (std::isnan(a)) return a;
  if (a < 0) return 2.0 - erfc(-a);
  if (a <= kErfRationalMax) return 1.0 - erf_rational(a);
  if (a >= kErfcUnderflow) return 0.0;
  const double scaled = a <= kErfcxSeam ? detail::erfcx_rational(a)
                                        : detail::erfcx_continued_fraction(a);
  return exp_neg_square(a) * scaled;
}

double erfcx(double a) {
  if (std::isnan(a)) return a;
  if (a < 0) throw DomainError("erfcx: argument must be >= 0");
  if (a < kErfcxSeam) return std::exp(a * a) * erfc(a);
  return detail::erfcx_continued_fraction(a);
}

double log_erfc(double a) {
  if (std::isnan(a)) return a;
  if (a < 1.0) return std::log(erfc(a));
  return std::log(erfcx(a)) - a * a;
}

LogValue bracket(double wt) {
  if (!(wt > 0)) throw DomainError("bracket: wt must be > 0");
  const double a = std::sqrt(0.5 * wt);
  const double b = a < kBracketAsymptoticMin ? detail::bracket_direct(a)
                                             : detail::bracket_asymptotic(a);
  if (!(b > 0)) throw NumericalFailure("bracket: non-positive result");
  return LogValue::from_value(b);
}

}  // namespace mangled::special
