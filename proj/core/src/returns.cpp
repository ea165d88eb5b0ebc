#include "unifluct/returns.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

#include "unifluct/error.hpp"

namespace unifluct {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

[[noreturn]] void parse_fail(std::string_view source, std::size_t line,
                             const std::string& what) {
  throw Error(ErrorKind::kParse, std::string(source) + ":" +
                                     std::to_string(line) + ": " + what);
}

}  // namespace

Date parse_date(std::string_view text) {
  text = trim(text);
  int y = 0;
  unsigned m = 0;
  unsigned d = 0;
  auto field = [&](std::string_view part, auto& out) {
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), out);
    return ec == std::errc() && ptr == part.data() + part.size() && !part.empty();
  };
  if (text.size() != 10 || text[4] != '-' || text[7] != '-' ||
      !field(text.substr(0, 4), y) || !field(text.substr(5, 2), m) ||
      !field(text.substr(8, 2), d)) {
    throw Error(ErrorKind::kParse,
                "expected an ISO-8601 date YYYY-MM-DD, got '" + std::string(text) + "'");
  }
  const Date date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!date.ok()) {
    throw Error(ErrorKind::kParse, "no such calendar date '" + std::string(text) + "'");
  }
  return date;
}

std::string format_date(Date date) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(date.year()),
                static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
  return buf;
}

PriceSeries::PriceSeries(std::vector<PricePoint> entries)
    : entries_(std::move(entries)) {
  if (entries_.size() < 2) {
    throw Error(ErrorKind::kInsufficientData,
                "a price series needs at least two rows");
  }
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (!(entries_[i].close > 0.0) || !std::isfinite(entries_[i].close)) {
      throw Error(ErrorKind::kInvalidParameter,
                  "non-positive close on " + format_date(entries_[i].date));
    }
    if (i > 0 && !(entries_[i - 1].date < entries_[i].date)) {
      throw Error(ErrorKind::kInvalidParameter,
                  "dates not strictly increasing at " + format_date(entries_[i].date));
    }
  }
}

PriceSeries read_price_csv(std::istream& in, std::string_view source) {
  std::string line;
  std::size_t lineno = 0;
  std::size_t date_col = std::numeric_limits<std::size_t>::max();
  std::size_t close_col = date_col;

  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cols = split_commas(line);
    for (std::size_t i = 0; i < cols.size(); ++i) {
      const auto name = lower(cols[i]);
      if (name == "date") date_col = i;
      if (name == "close") close_col = i;
    }
    break;
  }
  if (lineno == 0) parse_fail(source, 1, "empty input, expected a header row");
  if (date_col == std::numeric_limits<std::size_t>::max() ||
      close_col == std::numeric_limits<std::size_t>::max()) {
    parse_fail(source, lineno, "header must name 'date' and 'close' columns");
  }
  const std::size_t needed = std::max(date_col, close_col) + 1;

  std::vector<PricePoint> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cols = split_commas(line);
    if (cols.size() < needed) parse_fail(source, lineno, "missing columns");
    PricePoint p;
    try {
      p.date = parse_date(cols[date_col]);
    } catch (const Error& e) {
      parse_fail(source, lineno, e.what());
    }
    const auto text = cols[close_col];
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), p.close);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
      parse_fail(source, lineno, "bad close value '" + std::string(text) + "'");
    }
    if (!(p.close > 0.0) || !std::isfinite(p.close)) {
      parse_fail(source, lineno, "close must be positive");
    }
    if (!rows.empty() && !(rows.back().date < p.date)) {
      parse_fail(source, lineno, "dates must be strictly ascending");
    }
    rows.push_back(p);
  }
  if (rows.size() < 2) {
    throw Error(ErrorKind::kInsufficientData,
                std::string(source) + ": need at least two price rows");
  }
  return PriceSeries(std::move(rows));
}

PriceSeries read_price_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  return read_price_csv(in, path.string());
}

void write_price_csv(std::ostream& out, const PriceSeries& prices) {
  out << "date,close\n";
  char buf[64];
  for (const auto& p : prices.entries()) {
    std::snprintf(buf, sizeof buf, "%.17g", p.close);
    out << format_date(p.date) << ',' << buf << '\n';
  }
}

ReturnSeries compute_returns(const PriceSeries& prices) {
  const auto e = prices.entries();
  ReturnSeries out;
  out.reserve(e.size() - 1);
  for (std::size_t i = 0; i + 1 < e.size(); ++i) {
    out.push_back({e[i + 1].date, (e[i + 1].close - e[i].close) / e[i].close});
  }
  return out;
}

std::string_view to_string(Sign sign) {
  return sign == Sign::kPositive ? "positive" : "negative";
}

SignPartition partition(std::span<const DailyReturn> returns) {
  SignPartition out;
  for (const auto& r : returns) {
    if (r.value > 0.0) {
      out.positive.push_back(r.value);
    } else if (r.value < 0.0) {
      out.negative.push_back(-r.value);
    } else {
      ++out.zeros;
    }
  }
  return out;
}

RescaleStats rescale_stats(std::span<const double> magnitudes, double alpha) {
  if (magnitudes.empty()) {
    throw Error(ErrorKind::kInsufficientData, "no magnitudes to rescale");
  }
  if (!(alpha > 0.0)) {
    throw Error(ErrorKind::kInvalidParameter, "alpha must be positive");
  }
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double v : magnitudes) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw Error(ErrorKind::kInvalidParameter, "magnitudes must be positive");
    }
    const double p = std::pow(v, alpha);
    sum += p;
    sum_sq += p * p;
  }
  const double m = static_cast<double>(magnitudes.size());
  RescaleStats out;
  out.mu = sum / m;
  const double second = sum_sq / m;
  const double variance = second - out.mu * out.mu;
  const double floor = 8.0 * std::numeric_limits<double>::epsilon() * second;
  out.sigma = variance > floor ? std::sqrt(variance) : 0.0;
  return out;
}

FluctuationSet fluctuations(std::span<const double> magnitudes, double alpha,
                            Sign sign) {
  if (!(alpha > 0.0 && alpha <= 2.0)) {
    throw Error(ErrorKind::kInvalidParameter, "alpha must lie in (0, 2]");
  }
  const RescaleStats stats = rescale_stats(magnitudes, alpha);
  if (!(stats.sigma > 0.0)) {
    throw Error(ErrorKind::kDegenerateData,
                "alpha-rescaled magnitudes have zero variance");
  }
  FluctuationSet out;
  out.sign = sign;
  out.alpha = alpha;
  out.mu_alpha = stats.mu;
  out.sigma_alpha = stats.sigma;
  out.values.reserve(magnitudes.size());
  for (double v : magnitudes) {
    out.values.push_back((std::pow(v, alpha) - stats.mu) / stats.sigma);
  }
  const auto [lo, hi] = std::minmax_element(out.values.begin(), out.values.end());
  out.l_min = *lo;
  out.r_max = *hi;
  return out;
}

}  // namespace unifluct
