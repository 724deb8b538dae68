#pragma once

#include <cmath>

namespace medex {

/// Selects a log-spaced subset of a monotone index (iteration count or time):
/// fires for every value up to `dense_until` and then whenever the value
/// crosses the next point of a grid with `per_decade` points per decade,
/// starting at `first`.
class LogSchedule {
 public:
  explicit LogSchedule(int per_decade, double dense_until = 10.0, double first = 1.0)
      : per_decade_(per_decade), dense_until_(dense_until) {
    if (per_decade_ > 0) {
      exponent_ = static_cast<int>(std::floor(std::log10(first) * per_decade_));
      next_ = grid(exponent_);
    }
  }

  bool operator()(double value) {
    if (per_decade_ <= 0) return true;
    if (value <= dense_until_) return true;
    if (value < next_) return false;
    while (next_ <= value) next_ = grid(++exponent_);
    return true;
  }

 private:
  double grid(int e) const { return std::pow(10.0, static_cast<double>(e) / per_decade_); }

  int per_decade_;
  double dense_until_;
  int exponent_ = 0;
  double next_ = 1.0;
};

}  // namespace medex
