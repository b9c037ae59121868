#pragma once

#include <cmath>
#include <limits>
#include <span>

namespace mangled {

// A real number stored as sign * exp(log_magnitude). Counts of worlds reach
// e^{(v-w)t} with (v-w)t ~ 1e10, far outside double range, so every
// count-like quantity in the library travels in this form.
class LogValue {
 public:
  static constexpr double kNegInf = -std::numeric_limits<double>::infinity();

  constexpr LogValue() = default;

  static constexpr LogValue zero() { return LogValue(); }
  static constexpr LogValue one() { return LogValue(0.0, 1); }

  // sign must be -1 or +1; a -inf log yields zero regardless of sign.
  static LogValue from_log(double log_magnitude, int sign = 1);
  static LogValue from_value(double value);

  double log_magnitude() const { return log_; }
  int sign() const { return sign_; }
  bool is_zero() const { return sign_ == 0; }
  bool is_finite() const { return sign_ == 0 || std::isfinite(log_); }

  // Overflows to +-inf or underflows to 0 outside double range.
  double value() const;
  double log10() const { return log_ / std::log(10.0); }

  LogValue operator-() const { return LogValue(log_, -sign_); }
  LogValue& operator*=(LogValue rhs);
  LogValue& operator/=(LogValue rhs);
  friend LogValue operator*(LogValue a, LogValue b) { return a *= b; }
  friend LogValue operator/(LogValue a, LogValue b) { return a /= b; }
  friend LogValue operator+(LogValue a, LogValue b);
  friend LogValue operator-(LogValue a, LogValue b) { return a + (-b); }

  // Signed comparison.
  friend bool operator<(LogValue a, LogValue b);
  friend bool operator==(LogValue a, LogValue b) = default;

  LogValue pow(double exponent) const;
  LogValue sqrt() const { return pow(0.5); }

 private:
  constexpr LogValue(double log_magnitude, int sign) : log_(log_magnitude), sign_(sign) {}

  double log_ = kNegInf;
  int sign_ = 0;
};

// ln(sum_i exp(x_i)) with the largest term factored out; -inf for an empty
// span or all -inf terms.
double log_sum_exp(std::span<const double> logs);

// Signed sum of LogValues, evaluated as two max-factored partial sums.
LogValue log_sum_exp(std::span<const LogValue> terms);

// a - b for a >= b (signed comparison). Throws DomainError otherwise.
LogValue log_diff_exp(LogValue a, LogValue b);

// ln(1 - exp(x)) for x <= 0, accurate near both ends.
double log1mexp(double x);

}  // namespace mangled
