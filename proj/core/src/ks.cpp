#include "unifluct/ks.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "unifluct/error.hpp"

namespace unifluct {

EmpiricalCdf::EmpiricalCdf(std::span<const double> sample)
    : sorted_(sample.begin(), sample.end()) {
  if (sorted_.empty()) {
    throw Error(ErrorKind::kInsufficientData, "empirical cdf of an empty sample");
  }
  std::sort(sorted_.begin(), sorted_.end());
}

double EmpiricalCdf::operator()(double x) const {
  const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
  return static_cast<double>(it - sorted_.begin()) /
         static_cast<double>(sorted_.size());
}

KsStatistic ks_statistic_sorted(std::span<const double> sorted,
                                const ModelCdf& model) {
  if (sorted.empty()) {
    throw Error(ErrorKind::kInsufficientData, "KS statistic of an empty sample");
  }
  const double n = static_cast<double>(sorted.size());
  KsStatistic out;
  out.d_location = sorted.front();
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = model(sorted[i]);
    const double above = std::abs(static_cast<double>(i + 1) / n - f);
    const double below = std::abs(static_cast<double>(i) / n - f);
    const double d = std::max(above, below);
    if (d > out.d_stat) {
      out.d_stat = d;
      out.d_location = sorted[i];
    }
  }
  out.d_stat = std::min(out.d_stat, 1.0);
  return out;
}

KsStatistic ks_statistic(std::span<const double> sample, const ModelCdf& model) {
  std::vector<double> sorted(sample.begin(), sample.end());
  std::sort(sorted.begin(), sorted.end());
  return ks_statistic_sorted(sorted, model);
}

double kolmogorov_survival(double lambda) {
  if (!(lambda > 0.0)) return 1.0;
  if (lambda >= 1.18) {
    double sum = 0.0;
    for (int k = 1; k < 1000; ++k) {
      const double term = std::exp(-2.0 * k * k * lambda * lambda);
      sum += (k % 2 == 1) ? term : -term;
      if (term < 1e-12) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
  }
  constexpr double pi = std::numbers::pi;
  const double scale = pi * pi / (8.0 * lambda * lambda);
  double sum = 0.0;
  for (int k = 1; k < 1000; ++k) {
    const double odd = 2.0 * k - 1.0;
    const double term = std::exp(-odd * odd * scale);
    sum += term;
    if (term < 1e-17 * sum || term == 0.0) break;
  }
  const double cdf = std::sqrt(2.0 * pi) / lambda * sum;
  return std::clamp(1.0 - cdf, 0.0, 1.0);
}

double ks_pvalue(double d_stat, std::size_t n, PValueConvention convention) {
  const double root = std::sqrt(static_cast<double>(n));
  const double factor = convention == PValueConvention::kStephens
                            ? root + 0.12 + 0.11 / root
                            : root;
  return kolmogorov_survival(factor * std::clamp(d_stat, 0.0, 1.0));
}

KsResult ks_test(std::span<const double> sample, const ModelCdf& model,
                 PValueConvention convention) {
  std::vector<double> sorted(sample.begin(), sample.end());
  std::sort(sorted.begin(), sorted.end());
  const KsStatistic stat = ks_statistic_sorted(sorted, model);
  KsResult out;
  out.d_stat = stat.d_stat;
  out.d_location = stat.d_location;
  out.n = sorted.size();
  out.p_value = ks_pvalue(stat.d_stat, out.n, convention);
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i] == sorted[i - 1]) ++out.ties;
  }
  return out;
}

std::vector<DistancePoint> distance_curve(std::span<const double> sample,
                                          const ModelCdf& model,
                                          std::span<const double> grid) {
  if (grid.empty()) {
    throw Error(ErrorKind::kInvalidParameter, "distance curve needs a grid");
  }
  const EmpiricalCdf ecdf(sample);
  std::vector<DistancePoint> out;
  out.reserve(grid.size());
  for (double x : grid) out.push_back({x, std::abs(ecdf(x) - model(x))});
  return out;
}

}  // namespace unifluct
