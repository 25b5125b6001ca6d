#pragma once

#include <cmath>
#include <compare>
#include <limits>
#include <stdexcept>

namespace dualprox {

/// A value in ]-inf, +inf]. Finite values and +inf are kept apart explicitly so
/// that +inf never leaks into arithmetic on coordinates.
class ExtendedReal {
 public:
  constexpr ExtendedReal() = default;
  static constexpr ExtendedReal finite(double v) { return ExtendedReal(v, false); }
  static constexpr ExtendedReal infinity() { return ExtendedReal(0.0, true); }

  constexpr bool is_finite() const { return !infinite_; }
  constexpr bool is_infinite() const { return infinite_; }

  double value() const {
    if (infinite_) throw std::domain_error("ExtendedReal: value() of +inf");
    return value_;
  }
  /// +inf maps to the IEEE infinity; intended for reporting only.
  constexpr double to_double() const {
    return infinite_ ? std::numeric_limits<double>::infinity() : value_;
  }

  friend constexpr ExtendedReal operator+(ExtendedReal a, ExtendedReal b) {
    if (a.infinite_ || b.infinite_) return infinity();
    return finite(a.value_ + b.value_);
  }
  ExtendedReal& operator+=(ExtendedReal other) { return *this = *this + other; }

  /// Scaling by a nonnegative weight; 0 * inf is treated as inf (indicator
  /// terms are never switched off by a weight).
  friend ExtendedReal operator*(double w, ExtendedReal a) {
    if (!(w >= 0.0)) throw std::domain_error("ExtendedReal: negative scaling");
    if (a.infinite_) return infinity();
    return finite(w * a.value_);
  }

  friend constexpr bool operator==(ExtendedReal a, ExtendedReal b) {
    return a.infinite_ == b.infinite_ && (a.infinite_ || a.value_ == b.value_);
  }
  friend constexpr std::partial_ordering operator<=>(ExtendedReal a, ExtendedReal b) {
    if (a.infinite_ && b.infinite_) return std::partial_ordering::equivalent;
    if (a.infinite_) return std::partial_ordering::greater;
    if (b.infinite_) return std::partial_ordering::less;
    return a.value_ <=> b.value_;
  }

 private:
  constexpr ExtendedReal(double v, bool inf) : value_(v), infinite_(inf) {}
  double value_ = 0.0;
  bool infinite_ = false;
};

}  // namespace dualprox
