#pragma once

// One-sample Kolmogorov-Smirnov test against an arbitrary continuous cdf.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace unifluct {

using ModelCdf = std::function<double(double)>;

/// Right-continuous empirical distribution function of a sample.
class EmpiricalCdf {
 public:
  /// Throws kInsufficientData for an empty sample.
  explicit EmpiricalCdf(std::span<const double> sample);

  /// Fraction of sample points <= x.
  double operator()(double x) const;

  std::span<const double> sorted() const { return sorted_; }
  std::size_t size() const { return sorted_.size(); }

 private:
  std::vector<double> sorted_;
};

struct KsStatistic {
  double d_stat = 0.0;
  double d_location = 0.0;  // order statistic attaining the supremum
};

/// D = max_i max(|i/n - F(x_(i))|, |(i-1)/n - F(x_(i))|) over the order
/// statistics. Ties are not corrected for.
KsStatistic ks_statistic(std::span<const double> sample, const ModelCdf& model);

/// Same, for a sample that is already sorted ascending.
KsStatistic ks_statistic_sorted(std::span<const double> sorted,
                                const ModelCdf& model);

/// Q(lambda) = 2 sum_{k>=1} (-1)^(k-1) exp(-2 k^2 lambda^2), the Kolmogorov
/// survival function. The alternating series is used for lambda >= 1.18 and
/// truncated once a term drops below 1e-12; below that the equivalent theta
/// series 1 - sqrt(2 pi)/lambda sum exp(-(2k-1)^2 pi^2 / (8 lambda^2)) is
/// summed instead, since the alternating form converges slowly there.
double kolmogorov_survival(double lambda);

enum class PValueConvention {
  kStephens,    // lambda = (sqrt(n) + 0.12 + 0.11 / sqrt(n)) D
  kAsymptotic,  // lambda = sqrt(n) D
};

/// Asymptotic P value, clamped to [0, 1].
double ks_pvalue(double d_stat, std::size_t n,
                 PValueConvention convention = PValueConvention::kStephens);

struct KsResult {
  double d_stat = 0.0;
  std::size_t n = 0;
  double p_value = 1.0;
  double d_location = 0.0;
  std::size_t ties = 0;  // sample values equal to their predecessor
};

KsResult ks_test(std::span<const double> sample, const ModelCdf& model,
                 PValueConvention convention = PValueConvention::kStephens);

struct DistancePoint {
  double x = 0.0;
  double distance = 0.0;  // |F_emp(x) - F_model(x)|
};

/// Pointwise |F_emp - F_model| on `grid`. Throws kInvalidParameter for an
/// empty grid.
std::vector<DistancePoint> distance_curve(std::span<const double> sample,
                                          const ModelCdf& model,
                                          std::span<const double> grid);

}  // namespace unifluct
