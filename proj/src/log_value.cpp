#include "mangled/log_value.hpp"

#include <algorithm>
#include <vector>

#include "mangled/errors.hpp"

namespace mangled {

LogValue LogValue::from_log(double log_magnitude, int sign) {
  if (std::isnan(log_magnitude)) {
    throw DomainError("LogValue::from_log: NaN log magnitude");
  }
  if (sign != 1 && sign != -1) {
    throw DomainError("LogValue::from_log: sign must be +1 or -1");
  }
  if (log_magnitude == kNegInf) return zero();
  return LogValue(log_magnitude, sign);
}

LogValue LogValue::from_value(double value) {
  if (std::isnan(value)) throw DomainError("LogValue::from_value: NaN");
  if (value == 0.0) return zero();
  return LogValue(std::log(std::fabs(value)), value > 0 ? 1 : -1);
}

double LogValue::value() const {
  if (sign_ == 0) return 0.0;
  return sign_ * std::exp(log_);
}

LogValue& LogValue::operator*=(LogValue rhs) {
  if (sign_ == 0 || rhs.sign_ == 0) {
    *this = zero();
    return *this;
  }
  log_ += rhs.log_;
  sign_ *= rhs.sign_;
  return *this;
}

LogValue& LogValue::operator/=(LogValue rhs) {
  if (rhs.sign_ == 0) throw DomainError("LogValue: division by zero");
  if (sign_ == 0) return *this;
  log_ -= rhs.log_;
  sign_ *= rhs.sign_;
  return *this;
}

LogValue LogValue::pow(double exponent) const {
  if (sign_ < 0) throw DomainError("LogValue::pow: negative base");
  if (sign_ == 0) {
    if (exponent > 0) return zero();
    throw DomainError("LogValue::pow: zero to a non-positive power");
  }
  return LogValue(log_ * exponent, 1);
}

double log1mexp(double x) {
  if (x > 0) throw DomainError("log1mexp: argument must be <= 0");
  // Maechler's split: log(-expm1(x)) near 0, log1p(-exp(x)) further out.
  if (x > -M_LN2) return std::log(-std::expm1(x));
  return std::log1p(-std::exp(x));
}

double log_sum_exp(std::span<const double> logs) {
  if (logs.empty()) return LogValue::kNegInf;
  const double m = *std::max_element(logs.begin(), logs.end());
  if (m == LogValue::kNegInf) return m;
  if (std::isinf(m)) return m;
  double s = 0.0;
  for (double x : logs) s += std::exp(x - m);
  return m + std::log(s);
}

namespace {

// exp(a) - exp(b) for a >= b, in log form.
double log_sub(double a, double b) {
  if (b == LogValue::kNegInf) return a;
  return a + log1mexp(b - a);
}

}  // namespace

LogValue log_sum_exp(std::span<const LogValue> terms) {
  std::vector<double> pos;
  std::vector<double> neg;
  for (const LogValue& t : terms) {
    if (t.sign() > 0) pos.push_back(t.log_magnitude());
    if (t.sign() < 0) neg.push_back(t.log_magnitude());
  }
  const double lp = log_sum_exp(pos);
  const double ln = log_sum_exp(neg);
  if (lp == ln) return LogValue::zero();
  if (lp > ln) return LogValue::from_log(log_sub(lp, ln), 1);
  return LogValue::from_log(log_sub(ln, lp), -1);
}

LogValue operator+(LogValue a, LogValue b) {
  const LogValue terms[2] = {a, b};
  return log_sum_exp(terms);
}

bool operator<(LogValue a, LogValue b) {
  if (a.sign_ != b.sign_) return a.sign_ < b.sign_;
  if (a.sign_ == 0) return false;
  return a.sign_ > 0 ? a.log_ < b.log_ : a.log_ > b.log_;
}

LogValue log_diff_exp(LogValue a, LogValue b) {
  if (a < b) throw DomainError("log_diff_exp: requires a >= b");
  return a - b;
}

}  // namespace mangled
