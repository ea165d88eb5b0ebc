#pragma once

// End-to-end runs behind the command-line tool: table caching, fixed-alpha
// analysis, alpha scans and synthetic data generation.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "unifluct/alpha_scan.hpp"
#include "unifluct/bhp.hpp"
#include "unifluct/collapse.hpp"
#include "unifluct/returns.hpp"

namespace unifluct {

/// Environment variable naming the directory for cached BHP tables.
inline constexpr const char* kCacheDirEnv = "UNIFLUCT_CACHE_DIR";

enum class SignSelection { kPositive, kNegative, kBoth };

SignSelection parse_sign_selection(std::string_view text);

struct RunConfig {
  std::filesystem::path input;
  std::filesystem::path output;
  SignSelection sign = SignSelection::kBoth;

  std::optional<double> alpha;  // fixed-alpha mode
  std::optional<double> alpha_min;
  std::optional<double> alpha_max;
  std::optional<double> alpha_step;
  double refine_width = 0.001;

  std::size_t bins = kDefaultBins;
  std::filesystem::path table_path;  // empty: default_table_path(lattice_side)
  int lattice_side = 10;
  unsigned workers = 0;
  PValueConvention convention = PValueConvention::kStephens;
  std::filesystem::path tsv_dir;  // optional collapse-table export

  // simulate
  std::uint64_t seed = 1;
  std::size_t count = 3000;
  double mu0 = 0.063;
  double sigma0 = 0.032;
  double alpha0 = 0.55;
};

/// $UNIFLUCT_CACHE_DIR/bhp_L<L>.tsv, or .unifluct-cache/bhp_L<L>.tsv.
std::filesystem::path default_table_path(int lattice_side);

/// Loads or builds the table for config.lattice_side with default grid.
CachedTable obtain_table(const RunConfig& config);

/// Hex SHA-256 of a file's bytes.
std::string file_sha256(const std::filesystem::path& path);

/// Full analysis of one sign at a fixed alpha.
SignAnalysis analyze_sign(std::span<const double> magnitudes, Sign sign,
                          double alpha, const BhpTable& table, std::size_t bins,
                          PValueConvention convention =
                              PValueConvention::kStephens);

/// Coarse scan, refinement to `refine_width`, then full analysis at alpha*.
SignAnalysis scan_sign(std::span<const double> magnitudes, Sign sign,
                       const ScanOptions& options, double refine_width,
                       const BhpTable& table, std::size_t bins);

ScanOptions scan_options(const RunConfig& config);

/// Summary document of the cached table.
nlohmann::ordered_json run_bhp_table(const RunConfig& config);
nlohmann::ordered_json run_analyze(const RunConfig& config);
nlohmann::ordered_json run_scan(const RunConfig& config);

/// (sigma0 u + mu0)^(1 / alpha0) for u drawn from the BHP law on the table
/// grid, redrawing any u <= -mu0 / sigma0. Deterministic in seed.
std::vector<double> simulate_magnitudes(std::size_t count, std::uint64_t seed,
                                        double alpha0, double mu0, double sigma0,
                                        const BhpTable& table);

/// Magnitudes with fair random signs integrated into a price path starting at
/// 1000 on 1984-04-02, one weekday per row. Throws kInvalidParameter if a
/// negative return would reach -1.
PriceSeries simulate_prices(std::size_t count, std::uint64_t seed, double alpha0,
                            double mu0, double sigma0, const BhpTable& table);

/// Writes the simulated CSV to config.output.
nlohmann::ordered_json run_simulate(const RunConfig& config);

/// Pretty-printed document plus trailing newline.
std::string render(const nlohmann::ordered_json& doc);

/// Writes `text` to `path` (or stdout when path is empty or "-").
void write_output(const std::filesystem::path& path, const std::string& text);

}  // namespace unifluct
