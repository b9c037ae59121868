#pragma once

#include "mangled/log_value.hpp"

namespace mangled::special {

// Regime boundaries. Each seam has a test that evaluates both sides at the
// seam and requires agreement to 1e-12 relative.
//
//   erf/erfc   |a| <= kErfRationalMax      Cody rational for erf
//              |a| <= kErfcxSeam           Cody rational for erfcx, times e^{-a^2}
//              |a| >  kErfcxSeam           continued fraction for erfcx, times e^{-a^2}
//   erfcx      a <  kErfcxSeam             e^{a^2} * erfc(a)
//              a >= kErfcxSeam             continued fraction
//   bracket    a <  kBracketAsymptoticMin  1/(a sqrt(pi)) - erfcx(a)
//              a >= kBracketAsymptoticMin  asymptotic tail, cut at the smallest term
inline constexpr double kErfRationalMax = 0.46875;
inline constexpr double kErfcxSeam = 4.0;
inline constexpr double kBracketAsymptoticMin = 6.0;
// erfc(a) underflows to zero above this argument.
inline constexpr double kErfcUnderflow = 26.55;

double erf(double a);
double erfc(double a);

// e^{a^2} erfc(a), a >= 0. Throws DomainError for a < 0.
double erfcx(double a);

// ln erfc(a) for any real a, finite far past the point where erfc underflows.
double log_erfc(double a);

// B(wt) = sqrt(2/(pi wt)) - e^{wt/2} erfc(sqrt(wt/2)), always positive.
// Throws DomainError for wt <= 0.
LogValue bracket(double wt);

namespace detail {

double erfcx_rational(double a);
double erfcx_continued_fraction(double a);
double bracket_direct(double a);
double bracket_asymptotic(double a);

}  // namespace detail

}  // namespace mangled::special
