#pragma once

// Grid search for the rescaling exponent alpha that maximizes the KS P value
// of the fluctuation set against the BHP law truncated to its sample range.

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "unifluct/bhp.hpp"
#include "unifluct/ks.hpp"
#include "unifluct/returns.hpp"

namespace unifluct {

/// The asymptotic P value is not trusted below this many fluctuations.
inline constexpr std::size_t kMinKsSample = 20;

struct AlphaEvaluation {
  KsResult ks;
  FluctuationSet set;
  double truncation_mass = 0.0;
};

/// Fluctuations at alpha, BHP truncated to [l_min, r_max], one-sample KS.
/// Throws kInsufficientData below kMinKsSample magnitudes and propagates
/// degenerate-data and truncation errors.
AlphaEvaluation evaluate_alpha(std::span<const double> magnitudes, double alpha,
                               const BhpTable& table,
                               Sign sign = Sign::kPositive,
                               PValueConvention convention =
                                   PValueConvention::kStephens);

/// P value and D at one alpha. Used to drive the search with any objective.
struct AlphaPoint {
  double p_value = 0.0;
  double d_stat = 0.0;
};

using AlphaObjective = std::function<AlphaPoint(double alpha)>;

/// The curve part of a scan: independent of where the objective comes from.
struct ScanCurve {
  std::vector<double> alphas;    // strictly increasing
  std::vector<double> p_values;  // same length
  std::vector<double> d_stats;   // same length
  double alpha_star = 0.0;
  double p_star = 0.0;
  double grid_step = 0.0;  // coarse step the curve was built with
  std::vector<std::string> failures;  // "alpha: reason" for skipped points
};

struct ScanOptions {
  double alpha_min = 0.45;
  double alpha_max = 0.65;
  double step = 0.005;
  unsigned workers = 0;  // 0 = hardware concurrency
  PValueConvention convention = PValueConvention::kStephens;
};

/// alpha_min + i * step for i = 0 .. floor((alpha_max - alpha_min) / step).
/// Throws kInvalidParameter unless 0 < alpha_min < alpha_max and
/// 0 < step <= (alpha_max - alpha_min) / 4.
std::vector<double> alpha_grid(const ScanOptions& options);

/// Evaluates the objective on the grid (concurrently when workers > 1) and
/// takes the first argmax. Points whose objective throws are recorded in
/// `failures`; kScanFailed when every point failed.
ScanCurve scan_objective(const AlphaObjective& objective,
                         const ScanOptions& options);

/// Bisects around alpha_star: the spacing is halved and alpha_star +- spacing
/// evaluated until spacing <= target_width; all points are merged into the
/// curve. Points outside the coarse range are skipped. A no-op when
/// target_width >= the coarse step.
ScanCurve refine_objective(const AlphaObjective& objective, ScanCurve coarse,
                           double target_width);

struct ScanResult {
  Sign sign = Sign::kPositive;
  ScanCurve curve;
  FluctuationSet best_set;
  KsResult best_ks;
  double best_mass = 0.0;

  const std::vector<double>& alphas() const { return curve.alphas; }
  const std::vector<double>& p_values() const { return curve.p_values; }
  const std::vector<double>& d_stats() const { return curve.d_stats; }
  double alpha_star() const { return curve.alpha_star; }
  double p_star() const { return curve.p_star; }
};

/// Scan over the fluctuations of `magnitudes`. The magnitudes are sorted
/// first, so the result does not depend on their order; best_set.values are
/// in ascending order.
ScanResult scan(std::span<const double> magnitudes, const ScanOptions& options,
                const BhpTable& table, Sign sign = Sign::kPositive);

ScanResult refine(std::span<const double> magnitudes, const ScanResult& coarse,
                  const BhpTable& table, double target_width,
                  const ScanOptions& options = {});

}  // namespace unifluct
