#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace medex {

/// Least-squares fit of ln(value) = intercept + slope * ln(k).
struct RateFit {
  std::string column;
  double k_min = 0.0;
  double k_max = 0.0;
  double slope = 0.0;
  double intercept = 0.0;
  /// 1 when the values are constant.
  double r2 = 0.0;
  std::size_t points = 0;
};

inline constexpr std::size_t kMinFitPoints = 20;

/// Uses pairs with k in [k_min, k_max] and finite, strictly positive k and
/// value. Throws ArgumentError with fewer than kMinFitPoints such pairs.
RateFit fit_log_log(const std::vector<double>& k, const std::vector<double>& value,
                    double k_min, double k_max, std::string column = {});

/// Same fit on a CSV column against the first column (k or t).
RateFit fit_rate_slope(const std::string& csv_path, const std::string& column, double k_min,
                       double k_max);

/// [max(100, T/100), T]
std::pair<double, double> default_rate_window(double horizon);

}  // namespace medex
