#include "unifluct/pipeline.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <random>
#include <sstream>

#include "unifluct/error.hpp"

namespace unifluct {

using ordered_json = nlohmann::ordered_json;

SignSelection parse_sign_selection(std::string_view text) {
  if (text == "positive") return SignSelection::kPositive;
  if (text == "negative") return SignSelection::kNegative;
  if (text == "both") return SignSelection::kBoth;
  throw Error(ErrorKind::kInvalidParameter,
              "sign must be positive, negative or both");
}

std::filesystem::path default_table_path(int lattice_side) {
  const char* env = std::getenv(kCacheDirEnv);
  const std::filesystem::path dir =
      (env != nullptr && *env != '\0') ? std::filesystem::path(env)
                                       : std::filesystem::path(".unifluct-cache");
  return dir / ("bhp_L" + std::to_string(lattice_side) + ".tsv");
}

CachedTable obtain_table(const RunConfig& config) {
  const auto path = config.table_path.empty()
                        ? default_table_path(config.lattice_side)
                        : config.table_path;
  return load_or_build_table(path, BhpParams::for_lattice(config.lattice_side),
                             config.workers);
}

std::string file_sha256(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                              &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorKind::kIo, "SHA-256 unavailable");
  }
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    if (in.gcount() > 0) {
      EVP_DigestUpdate(ctx.get(), buf, static_cast<std::size_t>(in.gcount()));
    }
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  std::string hex;
  char byte[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(byte, sizeof byte, "%02x", digest[i]);
    hex += byte;
  }
  return hex;
}

namespace {

std::vector<double> distance_grid(const FluctuationSet& set) {
  constexpr std::size_t kPoints = 201;
  std::vector<double> grid(kPoints);
  const double step = (set.r_max - set.l_min) / static_cast<double>(kPoints - 1);
  for (std::size_t i = 0; i < kPoints; ++i) {
    grid[i] = set.l_min + step * static_cast<double>(i);
  }
  return grid;
}

void complete_analysis(SignAnalysis& a, std::span<const double> magnitudes,
                       const BhpTable& table, std::size_t bins) {
  const TruncatedBhp trunc = truncate(table, a.set.l_min, a.set.r_max);
  const ModelCdf model = [&trunc](double x) { return trunc.cdf(x); };
  a.transformed = transformed_pdf(a.set, trunc);
  a.fluctuation_collapse =
      overlay(histogram(a.set.values, HistogramSpec::covering(a.set.values, bins)),
              trunc);
  a.return_collapse = return_collapse(
      magnitudes, a.transformed, HistogramSpec::covering(magnitudes, bins));
  a.distance_curve = distance_curve(a.set.values, model, distance_grid(a.set));
}

}  // namespace

SignAnalysis analyze_sign(std::span<const double> magnitudes, Sign sign,
                          double alpha, const BhpTable& table, std::size_t bins,
                          PValueConvention convention) {
  const AlphaEvaluation e = evaluate_alpha(magnitudes, alpha, table, sign, convention);
  SignAnalysis a;
  a.sign = sign;
  a.set = e.set;
  a.ks = e.ks;
  complete_analysis(a, magnitudes, table, bins);
  return a;
}

SignAnalysis scan_sign(std::span<const double> magnitudes, Sign sign,
                       const ScanOptions& options, double refine_width,
                       const BhpTable& table, std::size_t bins) {
  ScanResult coarse = scan(magnitudes, options, table, sign);
  ScanResult fine = refine(magnitudes, coarse, table, refine_width, options);
  SignAnalysis a;
  a.sign = sign;
  a.set = fine.best_set;
  a.ks = fine.best_ks;
  a.scan = std::move(fine);
  complete_analysis(a, magnitudes, table, bins);
  return a;
}

ScanOptions scan_options(const RunConfig& config) {
  ScanOptions o;
  if (config.alpha_min) o.alpha_min = *config.alpha_min;
  if (config.alpha_max) o.alpha_max = *config.alpha_max;
  if (config.alpha_step) o.step = *config.alpha_step;
  o.workers = config.workers;
  o.convention = config.convention;
  alpha_grid(o);  // validates
  return o;
}

namespace {

ordered_json table_summary(const BhpTable& table, bool rebuilt,
                           const std::filesystem::path& path) {
  const BhpParams& p = table.params();
  ordered_json j;
  j["path"] = path.string();
  j["rebuilt"] = rebuilt;
  j["L"] = p.lattice_side;
  j["N"] = p.sites();
  j["x_max"] = p.x_max;
  j["grid_min"] = p.grid_min;
  j["grid_max"] = p.grid_max;
  j["grid_step"] = p.grid_step;
  j["quadrature_abs_tol"] = p.quadrature_abs_tol;
  j["normalization_factor"] = table.normalization_factor();
  j["mean"] = table.mean();
  j["standard_deviation"] = table.standard_deviation();
  j["third_central_moment"] = table.third_central_moment();
  j["support_upper"] = bhp_support_upper(p);
  return j;
}

std::vector<Sign> selected(SignSelection s) {
  switch (s) {
    case SignSelection::kPositive:
      return {Sign::kPositive};
    case SignSelection::kNegative:
      return {Sign::kNegative};
    case SignSelection::kBoth:
      break;
  }
  return {Sign::kPositive, Sign::kNegative};
}

ordered_json common_parameters(const RunConfig& c) {
  ordered_json p;
  p["sign"] = c.sign == SignSelection::kBoth
                  ? "both"
                  : (c.sign == SignSelection::kPositive ? "positive" : "negative");
  p["bins"] = c.bins;
  p["L"] = c.lattice_side;
  p["p_value_convention"] =
      c.convention == PValueConvention::kStephens ? "stephens" : "asymptotic";
  return p;
}

struct LoadedInput {
  PriceSeries prices;
  SignPartition parts;
  SignCounts counts;
};

LoadedInput load_input(const RunConfig& config) {
  if (config.input.empty()) {
    throw Error(ErrorKind::kInvalidParameter, "an input CSV is required");
  }
  PriceSeries prices = read_price_csv(config.input);
  const ReturnSeries returns = compute_returns(prices);
  SignPartition parts = partition(returns);
  SignCounts counts{prices.size(), returns.size(), parts.positive.size(),
                    parts.negative.size(), parts.zeros};
  return {std::move(prices), std::move(parts), counts};
}

void export_tsv(const RunConfig& config, std::span<const SignAnalysis> analyses) {
  if (config.tsv_dir.empty()) return;
  std::filesystem::create_directories(config.tsv_dir);
  for (const auto& a : analyses) {
    const std::string s(to_string(a.sign));
    std::ostringstream f1;
    write_collapse_tsv(f1, a.fluctuation_collapse);
    write_output(config.tsv_dir / (s + "_fluctuations.tsv"), f1.str());
    std::ostringstream f2;
    write_collapse_tsv(f2, a.return_collapse);
    write_output(config.tsv_dir / (s + "_returns.tsv"), f2.str());
  }
}

}  // namespace

ordered_json run_bhp_table(const RunConfig& config) {
  const auto path = config.table_path.empty()
                        ? default_table_path(config.lattice_side)
                        : config.table_path;
  const CachedTable cached = load_or_build_table(
      path, BhpParams::for_lattice(config.lattice_side), config.workers);
  return table_summary(cached.table, cached.rebuilt, path);
}

ordered_json run_analyze(const RunConfig& config) {
  if (!config.alpha) {
    throw Error(ErrorKind::kInvalidParameter, "analyze needs --alpha");
  }
  if (config.alpha_min || config.alpha_max || config.alpha_step) {
    throw Error(ErrorKind::kInvalidParameter,
                "--alpha and an alpha range are mutually exclusive");
  }
  const LoadedInput in = load_input(config);
  const CachedTable cached = obtain_table(config);
  std::vector<SignAnalysis> analyses;
  for (Sign s : selected(config.sign)) {
    const auto& m = s == Sign::kPositive ? in.parts.positive : in.parts.negative;
    analyses.push_back(
        analyze_sign(m, s, *config.alpha, cached.table, config.bins, config.convention));
  }
  export_tsv(config, analyses);
  ReportMeta meta;
  meta.command = "analyze";
  meta.input_path = config.input.filename().string();
  meta.input_sha256 = file_sha256(config.input);
  meta.parameters = common_parameters(config);
  meta.parameters["alpha"] = *config.alpha;
  meta.table = &cached.table;
  return report(meta, in.counts, analyses);
}

ordered_json run_scan(const RunConfig& config) {
  if (config.alpha) {
    throw Error(ErrorKind::kInvalidParameter,
                "scan takes an alpha range, not --alpha");
  }
  const ScanOptions options = scan_options(config);
  const LoadedInput in = load_input(config);
  const CachedTable cached = obtain_table(config);
  std::vector<SignAnalysis> analyses;
  for (Sign s : selected(config.sign)) {
    const auto& m = s == Sign::kPositive ? in.parts.positive : in.parts.negative;
    analyses.push_back(scan_sign(m, s, options, config.refine_width, cached.table,
                                 config.bins));
  }
  export_tsv(config, analyses);
  ReportMeta meta;
  meta.command = "scan";
  meta.input_path = config.input.filename().string();
  meta.input_sha256 = file_sha256(config.input);
  meta.parameters = common_parameters(config);
  meta.parameters["alpha_min"] = options.alpha_min;
  meta.parameters["alpha_max"] = options.alpha_max;
  meta.parameters["alpha_step"] = options.step;
  meta.parameters["refine_width"] = config.refine_width;
  meta.table = &cached.table;
  return report(meta, in.counts, analyses);
}

namespace {

void check_simulation(std::size_t count, double alpha0, double mu0,
                      double sigma0) {
  if (count == 0) throw Error(ErrorKind::kInvalidParameter, "count must be positive");
  if (!(alpha0 > 0.0 && alpha0 <= 2.0)) {
    throw Error(ErrorKind::kInvalidParameter, "alpha0 must lie in (0, 2]");
  }
  if (!(mu0 > 0.0) || !(sigma0 > 0.0)) {
    throw Error(ErrorKind::kInvalidParameter, "mu0 and sigma0 must be positive");
  }
}

double draw_magnitude(std::mt19937_64& engine, const BhpTable& table,
                      double alpha0, double mu0, double sigma0) {
  const double floor = -mu0 / sigma0;
  if (!(table.cdf(table.params().grid_max) - table.cdf(floor) > kMinTruncationMass)) {
    throw Error(ErrorKind::kInvalidParameter,
                "mu0 / sigma0 leaves no BHP mass above the rejection floor");
  }
  while (true) {
    const double u = table.quantile(unit_interval(engine()));
    if (u <= floor) continue;
    return std::pow(sigma0 * u + mu0, 1.0 / alpha0);
  }
}

}  // namespace

std::vector<double> simulate_magnitudes(std::size_t count, std::uint64_t seed,
                                        double alpha0, double mu0, double sigma0,
                                        const BhpTable& table) {
  check_simulation(count, alpha0, mu0, sigma0);
  std::mt19937_64 engine(seed);
  std::vector<double> out(count);
  for (auto& v : out) v = draw_magnitude(engine, table, alpha0, mu0, sigma0);
  return out;
}

PriceSeries simulate_prices(std::size_t count, std::uint64_t seed, double alpha0,
                            double mu0, double sigma0, const BhpTable& table) {
  check_simulation(count, alpha0, mu0, sigma0);
  std::mt19937_64 engine(seed);
  std::vector<PricePoint> rows;
  rows.reserve(count + 1);
  std::chrono::sys_days day{Date{std::chrono::year{1984}, std::chrono::April,
                                 std::chrono::day{2}}};
  auto next_weekday = [&day] {
    do {
      day += std::chrono::days{1};
    } while (std::chrono::weekday{day} == std::chrono::Saturday ||
             std::chrono::weekday{day} == std::chrono::Sunday);
  };
  double price = 1000.0;
  rows.push_back({Date{day}, price});
  for (std::size_t i = 0; i < count; ++i) {
    const double magnitude = draw_magnitude(engine, table, alpha0, mu0, sigma0);
    const bool positive = (engine() >> 63) != 0;
    if (!positive && magnitude >= 1.0) {
      throw Error(ErrorKind::kInvalidParameter,
                  "simulated negative return reaches -100%; lower mu0 or sigma0");
    }
    price *= positive ? 1.0 + magnitude : 1.0 - magnitude;
    next_weekday();
    rows.push_back({Date{day}, price});
  }
  return PriceSeries(std::move(rows));
}

ordered_json run_simulate(const RunConfig& config) {
  const CachedTable cached = obtain_table(config);
  const PriceSeries prices =
      simulate_prices(config.count, config.seed, config.alpha0, config.mu0,
                      config.sigma0, cached.table);
  std::ostringstream csv;
  write_price_csv(csv, prices);
  write_output(config.output, csv.str());
  ordered_json j;
  j["output"] = config.output.string();
  j["rows"] = prices.size();
  j["seed"] = config.seed;
  j["alpha0"] = config.alpha0;
  j["mu0"] = config.mu0;
  j["sigma0"] = config.sigma0;
  return j;
}

std::string render(const ordered_json& doc) { return doc.dump(2) + "\n"; }

void write_output(const std::filesystem::path& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << text) || !out.flush()) {
    throw Error(ErrorKind::kIo, "cannot write " + path.string());
  }
}

}  // namespace unifluct
