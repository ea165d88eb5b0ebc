#include "unifluct/interpolation.hpp"

#include <algorithm>
#include <cmath>

#include "unifluct/error.hpp"

namespace unifluct {

namespace {

// Harmonic-mean slope of Fritsch & Butland, the usual PCHIP choice on a
// uniform grid. Zero at local extrema.
double interior_slope(double d0, double d1) {
  if (d0 * d1 <= 0.0) return 0.0;
  return 2.0 * d0 * d1 / (d0 + d1);
}

double endpoint_slope(double d0, double d1) {
  // Three-point one-sided estimate, limited to keep monotonicity.
  double s = 0.5 * (3.0 * d0 - d1);
  if (s * d0 <= 0.0) return 0.0;
  if (d0 * d1 <= 0.0 && std::abs(s) > std::abs(3.0 * d0)) return 3.0 * d0;
  return s;
}

}  // namespace

UniformPchip::UniformPchip(double x0, double step, std::vector<double> values)
    : x0_(x0), step_(step), values_(std::move(values)) {
  if (!(step_ > 0.0) || values_.size() < 2) {
    throw Error(ErrorKind::kInvalidParameter,
                "interpolation grid needs a positive step and >= 2 nodes");
  }
  const std::size_t n = values_.size();
  std::vector<double> delta(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    delta[i] = (values_[i + 1] - values_[i]) / step_;
  }
  slopes_.assign(n, 0.0);
  if (n == 2) {
    slopes_[0] = slopes_[1] = delta[0];
    return;
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    slopes_[i] = interior_slope(delta[i - 1], delta[i]);
  }
  slopes_[0] = endpoint_slope(delta[0], delta[1]);
  slopes_[n - 1] = endpoint_slope(delta[n - 2], delta[n - 3]);
}

std::size_t UniformPchip::cell(double x) const {
  const double pos = (x - x0_) / step_;
  if (!(pos > 0.0)) return 0;
  const auto last = values_.size() - 2;
  const auto i = static_cast<std::size_t>(pos);
  return std::min(i, last);
}

double UniformPchip::eval_cell(std::size_t i, double t) const {
  if (t <= 0.0) return values_[i];
  if (t >= 1.0) return values_[i + 1];
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double h10 = t3 - 2.0 * t2 + t;
  const double h01 = -2.0 * t3 + 3.0 * t2;
  const double h11 = t3 - t2;
  // Increment form: a flat cell stays exactly flat, and the clamp keeps
  // rounding from stepping outside the node values of a monotone cell.
  const double y0 = values_[i];
  const double y1 = values_[i + 1];
  const double y = y0 + (y1 - y0) * h01 + step_ * (h10 * slopes_[i] + h11 * slopes_[i + 1]);
  if (slopes_[i] * slopes_[i + 1] >= 0.0 && (y1 - y0) * slopes_[i] >= 0.0 &&
      (y1 - y0) * slopes_[i + 1] >= 0.0) {
    return std::clamp(y, std::min(y0, y1), std::max(y0, y1));
  }
  return y;
}

double UniformPchip::operator()(double x) const {
  const double pos = (x - x0_) / step_;
  const double nearest = std::round(pos);
  if (std::abs(pos - nearest) < 1e-9 && nearest >= 0.0 &&
      nearest < static_cast<double>(values_.size())) {
    return values_[static_cast<std::size_t>(nearest)];
  }
  const std::size_t i = cell(x);
  const double t = (x - (x0_ + step_ * static_cast<double>(i))) / step_;
  return eval_cell(i, t);
}

}  // namespace unifluct
