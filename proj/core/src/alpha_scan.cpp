#include "unifluct/alpha_scan.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>

#include "parallel.hpp"
#include "unifluct/error.hpp"

namespace unifluct {

AlphaEvaluation evaluate_alpha(std::span<const double> magnitudes, double alpha,
                               const BhpTable& table, Sign sign,
                               PValueConvention convention) {
  if (magnitudes.size() < kMinKsSample) {
    throw Error(ErrorKind::kInsufficientData,
                "KS test needs at least " + std::to_string(kMinKsSample) +
                    " " + std::string(to_string(sign)) + " returns, got " +
                    std::to_string(magnitudes.size()));
  }
  AlphaEvaluation out;
  out.set = fluctuations(magnitudes, alpha, sign);
  const TruncatedBhp trunc = truncate(table, out.set.l_min, out.set.r_max);
  out.truncation_mass = trunc.mass();
  out.ks = ks_test(out.set.values, [&](double x) { return trunc.cdf(x); },
                   convention);
  return out;
}

std::vector<double> alpha_grid(const ScanOptions& options) {
  const double lo = options.alpha_min;
  const double hi = options.alpha_max;
  if (!(lo > 0.0 && lo < hi)) {
    throw Error(ErrorKind::kInvalidParameter,
                "alpha range must satisfy 0 < alpha_min < alpha_max");
  }
  if (!(options.step > 0.0 && options.step <= (hi - lo) / 4.0 + 1e-12)) {
    throw Error(ErrorKind::kInvalidParameter,
                "alpha step must lie in (0, (alpha_max - alpha_min) / 4]");
  }
  const auto count =
      static_cast<std::size_t>(std::floor((hi - lo) / options.step + 1e-9)) + 1;
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = lo + options.step * static_cast<double>(i);
  }
  return out;
}

namespace {

void take_argmax(ScanCurve& curve) {
  // First maximal index; alphas ascend, so ties resolve to the smallest alpha.
  std::size_t best = 0;
  for (std::size_t i = 1; i < curve.p_values.size(); ++i) {
    if (curve.p_values[i] > curve.p_values[best]) best = i;
  }
  curve.alpha_star = curve.alphas[best];
  curve.p_star = curve.p_values[best];
}

std::string describe_failure(double alpha, const std::string& what) {
  std::ostringstream s;
  s << "alpha " << alpha << ": " << what;
  return s.str();
}

}  // namespace

ScanCurve scan_objective(const AlphaObjective& objective,
                         const ScanOptions& options) {
  const std::vector<double> grid = alpha_grid(options);
  std::vector<std::optional<AlphaPoint>> points(grid.size());
  std::vector<std::string> errors(grid.size());
  detail::parallel_for(grid.size(), options.workers, [&](std::size_t i) {
    try {
      points[i] = objective(grid[i]);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });

  ScanCurve curve;
  curve.grid_step = options.step;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (points[i]) {
      curve.alphas.push_back(grid[i]);
      curve.p_values.push_back(points[i]->p_value);
      curve.d_stats.push_back(points[i]->d_stat);
    } else {
      curve.failures.push_back(describe_failure(grid[i], errors[i]));
    }
  }
  if (curve.alphas.empty()) {
    std::string msg = "every alpha in the scan failed";
    for (const auto& f : curve.failures) msg += "; " + f;
    throw Error(ErrorKind::kScanFailed, msg);
  }
  take_argmax(curve);
  return curve;
}

ScanCurve refine_objective(const AlphaObjective& objective, ScanCurve coarse,
                           double target_width) {
  if (!(target_width > 0.0)) {
    throw Error(ErrorKind::kInvalidParameter, "target width must be positive");
  }
  if (target_width >= coarse.grid_step || coarse.alphas.empty()) return coarse;

  std::map<double, AlphaPoint> merged;
  for (std::size_t i = 0; i < coarse.alphas.size(); ++i) {
    merged[coarse.alphas[i]] = {coarse.p_values[i], coarse.d_stats[i]};
  }
  auto known = [&](double a) {
    auto it = merged.lower_bound(a - 1e-12);
    return it != merged.end() && std::abs(it->first - a) <= 1e-12;
  };

  // Refinement stays inside the scanned range.
  const double lo = coarse.alphas.front();
  const double hi = coarse.alphas.back();
  ScanCurve out = std::move(coarse);
  double spacing = out.grid_step;
  while (spacing > target_width) {
    spacing *= 0.5;
    const double centre = out.alpha_star;
    for (double a : {centre - spacing, centre + spacing}) {
      if (a < lo || a > hi || known(a)) continue;
      try {
        merged[a] = objective(a);
      } catch (const std::exception& e) {
        out.failures.push_back(describe_failure(a, e.what()));
      }
    }
    out.alphas.clear();
    out.p_values.clear();
    out.d_stats.clear();
    for (const auto& [a, point] : merged) {
      out.alphas.push_back(a);
      out.p_values.push_back(point.p_value);
      out.d_stats.push_back(point.d_stat);
    }
    take_argmax(out);
  }
  return out;
}

namespace {

AlphaObjective make_objective(std::span<const double> sorted,
                              const BhpTable& table, Sign sign,
                              PValueConvention convention) {
  return [sorted, &table, sign, convention](double alpha) {
    const AlphaEvaluation e =
        evaluate_alpha(sorted, alpha, table, sign, convention);
    return AlphaPoint{e.ks.p_value, e.ks.d_stat};
  };
}

ScanResult finish(std::span<const double> sorted, ScanCurve curve,
                  const BhpTable& table, Sign sign,
                  PValueConvention convention) {
  ScanResult out;
  out.sign = sign;
  AlphaEvaluation best =
      evaluate_alpha(sorted, curve.alpha_star, table, sign, convention);
  out.curve = std::move(curve);
  out.best_set = std::move(best.set);
  out.best_ks = best.ks;
  out.best_mass = best.truncation_mass;
  return out;
}

}  // namespace

ScanResult scan(std::span<const double> magnitudes, const ScanOptions& options,
                const BhpTable& table, Sign sign) {
  std::vector<double> sorted(magnitudes.begin(), magnitudes.end());
  std::sort(sorted.begin(), sorted.end());
  const auto objective = make_objective(sorted, table, sign, options.convention);
  return finish(sorted, scan_objective(objective, options), table, sign,
                options.convention);
}

ScanResult refine(std::span<const double> magnitudes, const ScanResult& coarse,
                  const BhpTable& table, double target_width,
                  const ScanOptions& options) {
  if (target_width >= coarse.curve.grid_step) return coarse;
  std::vector<double> sorted(magnitudes.begin(), magnitudes.end());
  std::sort(sorted.begin(), sorted.end());
  const auto objective =
      make_objective(sorted, table, coarse.sign, options.convention);
  return finish(sorted, refine_objective(objective, coarse.curve, target_width),
                table, coarse.sign, options.convention);
}

}  // namespace unifluct
