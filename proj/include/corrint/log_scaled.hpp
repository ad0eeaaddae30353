#pragma once

#include <cmath>
#include <limits>
#include <ostream>

namespace corrint {

/// A real number stored as sign * exp(log_mag).
///
/// Interference moments carry factors like exp(sigma^2) that overflow a
/// double long before sigma reaches the upper end of realistic shadowing
/// spreads, so every such quantity is passed around in this form.
class LogScaled {
 public:
  constexpr LogScaled() = default;

  static constexpr LogScaled zero() { return LogScaled{}; }

  /// exp(log_mag) with positive sign.
  static LogScaled from_log(double log_mag, int sign = 1) {
    LogScaled r;
    r.sign_ = sign > 0 ? 1 : (sign < 0 ? -1 : 0);
    r.log_mag_ = r.sign_ == 0 ? 0.0 : log_mag;
    return r;
  }

  static LogScaled from_double(double v) {
    if (v == 0.0) return zero();
    return from_log(std::log(std::fabs(v)), v > 0 ? 1 : -1);
  }

  double log_mag() const { return log_mag_; }
  int sign() const { return sign_; }
  bool is_zero() const { return sign_ == 0; }

  /// Linear value; overflows to +-inf or underflows to 0 outside double range.
  double value() const { return sign_ == 0 ? 0.0 : sign_ * std::exp(log_mag_); }

  LogScaled operator-() const { return from_log(log_mag_, -sign_); }

  friend LogScaled operator*(const LogScaled& a, const LogScaled& b) {
    if (a.is_zero() || b.is_zero()) return zero();
    return from_log(a.log_mag_ + b.log_mag_, a.sign_ * b.sign_);
  }

  friend LogScaled operator/(const LogScaled& a, const LogScaled& b) {
    if (b.is_zero()) {
      return from_log(std::numeric_limits<double>::infinity(), a.sign_ == 0 ? 1 : a.sign_);
    }
    if (a.is_zero()) return zero();
    return from_log(a.log_mag_ - b.log_mag_, a.sign_ * b.sign_);
  }

  friend LogScaled operator+(const LogScaled& a, const LogScaled& b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    const LogScaled& big = a.log_mag_ >= b.log_mag_ ? a : b;
    const LogScaled& small = a.log_mag_ >= b.log_mag_ ? b : a;
    const double ratio = std::exp(small.log_mag_ - big.log_mag_);
    if (big.sign_ == small.sign_) {
      return from_log(big.log_mag_ + std::log1p(ratio), big.sign_);
    }
    if (ratio == 1.0) return zero();
    return from_log(big.log_mag_ + std::log1p(-ratio), big.sign_);
  }

  friend LogScaled operator-(const LogScaled& a, const LogScaled& b) { return a + (-b); }

  LogScaled& operator+=(const LogScaled& o) { return *this = *this + o; }
  LogScaled& operator*=(const LogScaled& o) { return *this = *this * o; }

  friend LogScaled operator*(const LogScaled& a, double b) { return a * from_double(b); }
  friend LogScaled operator*(double a, const LogScaled& b) { return from_double(a) * b; }

  friend std::ostream& operator<<(std::ostream& os, const LogScaled& v) {
    if (v.is_zero()) return os << "0";
    return os << (v.sign_ < 0 ? "-" : "") << "exp(" << v.log_mag_ << ")";
  }

 private:
  double log_mag_ = 0.0;
  int sign_ = 0;
};

/// Ratio a/b as a plain double (both operands may be far outside double range).
inline double ratio(const LogScaled& a, const LogScaled& b) { return (a / b).value(); }

}  // namespace corrint
