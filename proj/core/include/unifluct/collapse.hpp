#pragma once

// Data-collapse artifacts: density histograms overlaid with model densities,
// the induced density of the raw return magnitudes, and the run report.

#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "unifluct/alpha_scan.hpp"
#include "unifluct/bhp.hpp"
#include "unifluct/ks.hpp"
#include "unifluct/returns.hpp"

namespace unifluct {

inline constexpr std::size_t kDefaultBins = 30;

/// Stand-in for log10 of an empty bin or a zero model density.
inline constexpr double kLog10Sentinel = -999.0;

struct HistogramSpec {
  std::size_t bin_count = kDefaultBins;
  double lo = 0.0;
  double hi = 1.0;

  /// bin_count bins over [min, max] of `values`.
  static HistogramSpec covering(std::span<const double> values,
                                std::size_t bin_count = kDefaultBins);

  /// Throws kInvalidParameter unless lo < hi and bin_count >= 5.
  void validate() const;
  double width() const { return (hi - lo) / static_cast<double>(bin_count); }
};

struct HistogramBin {
  double center = 0.0;
  std::size_t count = 0;
  double density = 0.0;  // count / (in_range * width)
};

struct Histogram {
  HistogramSpec spec;
  std::vector<HistogramBin> bins;
  std::size_t in_range = 0;
  std::size_t below = 0;
  std::size_t above = 0;
};

/// Density-normalized over the in-range values (a value equal to hi goes in
/// the last bin). Throws kInsufficientData when no value is in range.
Histogram histogram(std::span<const double> values, const HistogramSpec& spec);

struct CollapseRow {
  double center = 0.0;
  double hist_density = 0.0;
  double model_density = 0.0;
  double log10_hist = kLog10Sentinel;
  double log10_model = kLog10Sentinel;
};

struct CollapseTable {
  Histogram hist;
  std::vector<CollapseRow> rows;
};

using ModelDensity = std::function<double(double)>;

CollapseTable overlay(const Histogram& hist, const ModelDensity& model);
CollapseTable overlay(const Histogram& hist, const TruncatedBhp& trunc);

/// `center<TAB>hist_density<TAB>model_density`, one header line.
void write_collapse_tsv(std::ostream& out, const CollapseTable& table);

/// Density of the raw magnitudes x implied by BHP-distributed fluctuations:
///   g(x) = coef_a x^(alpha-1) f_BHP(coef_b x^alpha - coef_c)
/// on the image [support_lo, support_hi] of the truncation interval.
struct TransformedPdf {
  Sign sign = Sign::kPositive;
  double alpha_star = 0.0;
  double mu = 0.0;
  double sigma = 0.0;
  double mass = 0.0;          // F_BHP(R) - F_BHP(L)
  double coef_a = 0.0;        // alpha / (sigma * mass)
  double coef_b = 0.0;        // 1 / sigma
  double coef_c = 0.0;        // mu / sigma
  double paper_coef_a = 0.0;  // alpha / mu, for comparison
  double support_lo = 0.0;
  double support_hi = 0.0;
  const BhpTable* table = nullptr;  // non-owning
  double lower = 0.0;               // truncation interval in fluctuation units
  double upper = 0.0;

  double pdf(double x) const;
  double cdf(double x) const;

  /// True when the two prefactor conventions disagree beyond 1e-9 relative.
  bool prefactor_discrepancy() const;
};

/// Throws kInvalidParameter for a zero-mass truncation.
TransformedPdf transformed_pdf(const FluctuationSet& set,
                               const TruncatedBhp& trunc);

/// Histogram of the raw magnitudes with g evaluated at the bin centres.
CollapseTable return_collapse(std::span<const double> magnitudes,
                              const TransformedPdf& tp,
                              const HistogramSpec& spec);

// --- report ------------------------------------------------------------------

struct SignCounts {
  std::size_t prices = 0;
  std::size_t returns = 0;
  std::size_t positive = 0;
  std::size_t negative = 0;
  std::size_t zeros = 0;
};

/// Everything computed for one sign in one run.
struct SignAnalysis {
  Sign sign = Sign::kPositive;
  std::optional<ScanResult> scan;  // absent in fixed-alpha mode
  FluctuationSet set;
  KsResult ks;
  TransformedPdf transformed;
  CollapseTable fluctuation_collapse;
  CollapseTable return_collapse;
  std::vector<DistancePoint> distance_curve;
};

struct ReportMeta {
  std::string tool = "unifluct";
  std::string version;
  std::string command;
  std::string input_path;
  std::string input_sha256;
  nlohmann::ordered_json parameters = nlohmann::ordered_json::object();
  const BhpTable* table = nullptr;
};

/// Library version string baked in at build time.
std::string library_version();

/// Single structured document with a fixed field order: meta, counts, scan,
/// stats, ks, transformed, histograms, distance_curves.
nlohmann::ordered_json report(const ReportMeta& meta, const SignCounts& counts,
                              std::span<const SignAnalysis> analyses);

}  // namespace unifluct
