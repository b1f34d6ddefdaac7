#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace qbp::num {

struct LinearFit {
  double slope = 0;
  double intercept = 0;
  double r = 0;  // Pearson correlation
};

// Least squares y = slope * x + intercept.
inline LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("linear_fit: need >= 2 matching points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sx += x[k];
    sy += y[k];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, syy = 0, sxy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    syy += (y[k] - my) * (y[k] - my);
    sxy += (x[k] - mx) * (y[k] - my);
  }
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r = (syy > 0) ? sxy / std::sqrt(sxx * syy) : 0.0;
  return f;
}

// Fit of log(y) against x.
inline LinearFit log_linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> ly;
  for (double v : y) ly.push_back(std::log(v));
  return linear_fit(x, ly);
}

inline bool strictly_decreasing(const std::vector<double>& y) {
  for (std::size_t k = 1; k < y.size(); ++k)
    if (!(y[k] < y[k - 1])) return false;
  return true;
}

inline bool non_increasing(const std::vector<double>& y, double slack = 0) {
  for (std::size_t k = 1; k < y.size(); ++k)
    if (y[k] > y[k - 1] + slack) return false;
  return true;
}

}  // namespace qbp::num
