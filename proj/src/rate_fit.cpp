#include "medex/rate_fit.hpp"

#include <algorithm>
#include <cmath>

#include "medex/csv.hpp"
#include "medex/errors.hpp"

namespace medex {

RateFit fit_log_log(const std::vector<double>& k, const std::vector<double>& value, double k_min,
                    double k_max, std::string column) {
  if (k.size() != value.size()) throw ArgumentError("fit inputs differ in length");
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t i = 0; i < k.size(); ++i) {
    const double a = k[i];
    const double b = value[i];
    if (!(a >= k_min && a <= k_max)) continue;
    if (!(a > 0.0) || !std::isfinite(a) || !(b > 0.0) || !std::isfinite(b)) continue;
    xs.push_back(std::log(a));
    ys.push_back(std::log(b));
  }
  if (xs.size() < kMinFitPoints) {
    throw ArgumentError("rate window [" + std::to_string(k_min) + ", " + std::to_string(k_max) +
                        "] holds " + std::to_string(xs.size()) + " usable points, need " +
                        std::to_string(kMinFitPoints));
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0.0)) throw ArgumentError("rate window has a single distinct k");

  RateFit fit;
  fit.column = std::move(column);
  fit.k_min = k_min;
  fit.k_max = k_max;
  fit.points = xs.size();
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  const bool constant =
      std::all_of(ys.begin(), ys.end(), [&](double y) { return y == ys.front(); });
  if (constant || syy == 0.0) {
    fit.slope = 0.0;
    fit.intercept = ys.front();
    fit.r2 = 1.0;
  } else {
    double ss_res = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double e = ys[i] - fit.intercept - fit.slope * xs[i];
      ss_res += e * e;
    }
    fit.r2 = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
  }
  return fit;
}

RateFit fit_rate_slope(const std::string& csv_path, const std::string& column, double k_min,
                       double k_max) {
  const CsvColumns csv = read_csv_file(csv_path);
  if (csv.columns.empty()) throw ArgumentError("CSV has no columns");
  const std::size_t col = csv.index(column);
  std::vector<double> ks;
  std::vector<double> vs;
  for (const auto& row : csv.rows) {
    if (!row[0] || !row[col]) continue;
    ks.push_back(*row[0]);
    vs.push_back(*row[col]);
  }
  return fit_log_log(ks, vs, k_min, k_max, column);
}

std::pair<double, double> default_rate_window(double horizon) {
  return {std::max(100.0, horizon / 100.0), horizon};
}

}  // namespace medex
