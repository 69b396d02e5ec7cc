#include "resroute/predictor.hpp"

#include <algorithm>
#include <cmath>

#include "resroute/error.hpp"

namespace resroute {

void ErrorWindow::record(Seconds t_cur, Seconds t_lpf) {
  errors_.push_back(t_cur - t_lpf);
  if (errors_.size() > kCapacity) errors_.pop_front();
}

std::vector<std::pair<double, double>> ErrorWindow::samples() const {
  std::vector<std::pair<double, double>> out;
  out.reserve(errors_.size());
  for (std::size_t i = 0; i < errors_.size(); ++i) out.emplace_back(static_cast<double>(i + 1), errors_[i]);
  return out;
}

double ErrorWindow::pearson_r() const {
  const std::size_t n = errors_.size();
  if (n < 2) return 0.0;
  // x = 1..n, so its mean and spread are closed-form.
  const double mean_x = (static_cast<double>(n) + 1.0) / 2.0;
  double mean_y = 0.0;
  for (double y : errors_) mean_y += y;
  mean_y /= static_cast<double>(n);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = static_cast<double>(i + 1) - mean_x;
    const double dy = errors_[i] - mean_y;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return std::clamp(sxy / (std::sqrt(sxx) * std::sqrt(syy)), -1.0, 1.0);
}

double pearson_r(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw InvalidArgument("pearson_r needs equally sized samples");
  const std::size_t n = x.size();
  if (n < 2) return 0.0;
  double mean_x = 0.0;
  double mean_y = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mean_x += x[i];
    mean_y += y[i];
  }
  mean_x /= static_cast<double>(n);
  mean_y /= static_cast<double>(n);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mean_x;
    const double dy = y[i] - mean_y;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return std::clamp(sxy / (std::sqrt(sxx) * std::sqrt(syy)), -1.0, 1.0);
}

Seconds blend(double r, Seconds t_lpf, Seconds t_cur) {
  if (!(r >= -1.0 && r <= 1.0)) throw InvalidArgument("correlation outside [-1, 1]");
  const double w = std::abs(r);
  if (r < 0.0) return w * t_lpf + (1.0 - w) * t_cur;
  if (r > 0.0) return (1.0 - w) * t_lpf + w * t_cur;
  return t_lpf;
}

}  // namespace resroute
