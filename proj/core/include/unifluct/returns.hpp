#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace unifluct {

using Date = std::chrono::year_month_day;

/// ISO-8601 (YYYY-MM-DD) parse; throws kParse.
Date parse_date(std::string_view text);
std::string format_date(Date date);

struct PricePoint {
  Date date;
  double close = 0.0;
};

/// Dated closes with strictly increasing dates, positive closes, >= 2 rows.
class PriceSeries {
 public:
  /// Throws kInvalidParameter (ordering, non-positive close) or
  /// kInsufficientData (fewer than two rows).
  explicit PriceSeries(std::vector<PricePoint> entries);

  std::span<const PricePoint> entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

 private:
  std::vector<PricePoint> entries_;
};

/// Reads a `date,close` CSV with a header row; extra columns are ignored.
/// Malformed or out-of-order rows are kParse errors naming the line.
PriceSeries read_price_csv(std::istream& in, std::string_view source = "<input>");
PriceSeries read_price_csv(const std::filesystem::path& path);

/// `date,close` with 17 significant digits.
void write_price_csv(std::ostream& out, const PriceSeries& prices);

struct DailyReturn {
  Date date;  // the later of the two days
  double value = 0.0;
};

using ReturnSeries = std::vector<DailyReturn>;

/// r = (close[i+1] - close[i]) / close[i], dated at the later day.
ReturnSeries compute_returns(const PriceSeries& prices);

enum class Sign { kPositive, kNegative };

std::string_view to_string(Sign sign);

struct SignPartition {
  std::vector<double> positive;  // r for r > 0
  std::vector<double> negative;  // -r for r < 0
  std::size_t zeros = 0;
};

SignPartition partition(std::span<const DailyReturn> returns);

struct RescaleStats {
  double mu = 0.0;
  double sigma = 0.0;
};

/// Mean and population standard deviation of v^alpha:
///   mu = (1/m) sum v^alpha,  sigma = sqrt((1/m) sum v^(2 alpha) - mu^2).
/// A variance below the rounding floor of the two sums is reported as exactly
/// zero. Throws kInsufficientData on an empty list and kInvalidParameter for
/// alpha <= 0 or a non-positive magnitude.
RescaleStats rescale_stats(std::span<const double> magnitudes, double alpha);

/// One sign's normalized alpha-fluctuations (v^alpha - mu) / sigma.
struct FluctuationSet {
  Sign sign = Sign::kPositive;
  double alpha = 0.0;
  std::vector<double> values;  // same order as the input magnitudes
  double mu_alpha = 0.0;
  double sigma_alpha = 0.0;
  double l_min = 0.0;
  double r_max = 0.0;

  std::size_t count() const { return values.size(); }
};

/// Throws kDegenerateData when sigma == 0, kInvalidParameter for alpha
/// outside (0, 2].
FluctuationSet fluctuations(std::span<const double> magnitudes, double alpha,
                            Sign sign = Sign::kPositive);

}  // namespace unifluct
