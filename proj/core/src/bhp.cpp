#include "unifluct/bhp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "parallel.hpp"
#include "unifluct/error.hpp"
#include "unifluct/quadrature.hpp"

namespace unifluct {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kInitialPanels = 64;
constexpr int kMaxDepth = 40;
constexpr std::size_t kMaxEvaluations = 1u << 20;

// Distinct c_k = 1 / (N lambda_k) with multiplicities. The L x L spectrum is
// highly degenerate (20 distinct values out of 99 at L = 10), so grouping
// cuts the cost of every integrand evaluation.
struct Spectrum {
  std::vector<double> scale;         // c_k
  std::vector<double> multiplicity;  // m_k
  double scale_sum = 0.0;            // sum m_k c_k
  double sigma = 0.0;                // sqrt(sum m_k c_k^2 / 2)
  double support_upper = 0.0;        // scale_sum / (2 sigma)
};

Spectrum make_spectrum(const BhpParams& params) {
  std::vector<double> lambda = params.eigenvalues;
  std::sort(lambda.begin(), lambda.end());
  Spectrum s;
  const double n = params.sites();
  for (std::size_t i = 0; i < lambda.size();) {
    std::size_t j = i + 1;
    while (j < lambda.size() && lambda[j] - lambda[i] <= 1e-12 * lambda[i]) ++j;
    s.scale.push_back(1.0 / (n * lambda[i]));
    s.multiplicity.push_back(static_cast<double>(j - i));
    i = j;
  }
  double sq = 0.0;
  for (std::size_t k = 0; k < s.scale.size(); ++k) {
    s.scale_sum += s.multiplicity[k] * s.scale[k];
    sq += s.multiplicity[k] * s.scale[k] * s.scale[k];
  }
  s.sigma = std::sqrt(0.5 * sq);
  s.support_upper = s.scale_sum / (2.0 * s.sigma);
  return s;
}

// sum_k m_k log1p((t c_k)^2), the log of the inverse fourth power of the
// integrand envelope.
double log_decay(const std::vector<double>& scale,
                 const std::vector<double>& mult, double t) {
  double acc = 0.0;
  for (std::size_t k = 0; k < scale.size(); ++k) {
    const double u = t * scale[k];
    acc += mult[k] * std::log1p(u * u);
  }
  return acc;
}

// Smallest t with log_decay(t) >= target, by bracketing and bisection.
double cutoff_for(const std::vector<double>& scale,
                  const std::vector<double>& mult, double target) {
  double hi = 1.0;
  while (log_decay(scale, mult, hi) < target) hi *= 2.0;
  double lo = 0.0;
  for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (log_decay(scale, mult, mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

// Solves sum_k m_k c_k / (1 + y c_k) = target for y > -1 / max c_k. The left
// side decreases monotonically from +inf to 0 on that interval.
double saddle_shift(const Spectrum& s, double target) {
  auto lhs = [&](double y) {
    double acc = 0.0;
    for (std::size_t k = 0; k < s.scale.size(); ++k) {
      acc += s.multiplicity[k] * s.scale[k] / (1.0 + y * s.scale[k]);
    }
    return acc;
  };
  const double c_max = *std::max_element(s.scale.begin(), s.scale.end());
  double lo = -1.0 / c_max;
  double hi = 1.0;
  while (lhs(hi) > target) hi *= 2.0;
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (lhs(mid) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

struct PointEvaluator {
  const BhpParams& params;
  Spectrum spectrum;
  double decay_target;  // log_decay at the real-axis x_max

  explicit PointEvaluator(const BhpParams& p)
      : params(p), spectrum(make_spectrum(p)) {
    decay_target =
        log_decay(spectrum.scale, spectrum.multiplicity, params.x_max);
  }

  BhpPointEvaluation operator()(double mu, bool with_imaginary) const {
    BhpPointEvaluation out;
    const Spectrum& s = spectrum;
    const double target = s.scale_sum - 2.0 * s.sigma * mu;
    if (!(target > 0.0)) return out;  // at or beyond the support edge

    // Along x = t + i y the integrand factorizes into an envelope at t = 0
    // and a normalized part with the effective scales c_k / (1 + y c_k).
    const double y = saddle_shift(s, target);
    const double drift = mu * s.sigma - 0.5 * s.scale_sum;
    std::vector<double> eff(s.scale.size());
    double log_envelope = -y * drift;
    for (std::size_t k = 0; k < s.scale.size(); ++k) {
      const double shifted = 1.0 + y * s.scale[k];
      eff[k] = s.scale[k] / shifted;
      log_envelope -= 0.5 * s.multiplicity[k] * std::log(shifted);
    }
    const double upper = cutoff_for(eff, s.multiplicity, decay_target);
    const auto& mult = s.multiplicity;

    auto phase_and_modulus = [&](double t, double& phase, double& modulus) {
      double arg = t * drift;
      double log_mod = 0.0;
      for (std::size_t k = 0; k < eff.size(); ++k) {
        const double u = t * eff[k];
        arg += 0.5 * mult[k] * std::atan(u);
        log_mod -= 0.25 * mult[k] * std::log1p(u * u);
      }
      phase = arg;
      modulus = std::exp(log_mod);
    };
    auto real_part = [&](double t) {
      double phase = 0.0;
      double modulus = 0.0;
      phase_and_modulus(t, phase, modulus);
      return modulus * std::cos(phase);
    };

    const double prefactor = s.sigma / kPi * std::exp(log_envelope);
    if (prefactor == 0.0) return out;
    // Tolerance on the normalized integral, chosen so that the density is
    // accurate to quadrature_abs_tol wherever the envelope is O(1).
    const double tol = params.quadrature_abs_tol * kPi / s.sigma;
    // Small lattices decay slowly and leave long oscillatory paths, so the
    // evaluation budget grows with the number of phase cycles on the path.
    const double cycles = upper * (std::abs(drift) + eff.front()) / (2.0 * kPi);
    const std::size_t budget = std::max<std::size_t>(
        kMaxEvaluations,
        static_cast<std::size_t>(std::min(1e9, 1024.0 * std::ceil(cycles))));
    const QuadratureResult q = adaptive_simpson(
        real_part, 0.0, upper, tol, kInitialPanels, kMaxDepth, budget);
    out.contour_shift = y;
    out.path_length = upper;
    out.evaluations = q.evaluations;
    out.error_estimate = prefactor * q.error_estimate;
    // A spent budget is acceptable when the achieved estimate already meets
    // the tolerance in density units.
    if (!q.converged && !(out.error_estimate <= params.quadrature_abs_tol)) {
      std::ostringstream msg;
      msg << "BHP density quadrature did not converge at mu = " << mu
          << " (error estimate " << out.error_estimate << " after "
          << q.evaluations << " evaluations on a path of length " << upper
          << ")";
      throw Error(ErrorKind::kNumericalConvergence, msg.str(),
                  out.error_estimate);
    }
    out.value = std::max(0.0, prefactor * q.value);

    if (with_imaginary) {
      // Imaginary part over [-T, T] integrated directly, both halves
      // evaluated independently.
      auto imag_part = [&](double t) {
        double phase = 0.0;
        double modulus = 0.0;
        phase_and_modulus(t, phase, modulus);
        return modulus * std::sin(phase);
      };
      const QuadratureResult qi = adaptive_simpson(
          imag_part, -upper, upper, tol, 2 * kInitialPanels, kMaxDepth,
          2 * budget);
      out.imag_residual = 0.5 * prefactor * qi.value;
    }
    return out;
  }
};

}  // namespace

std::vector<double> lattice_eigenvalues(int lattice_side) {
  if (lattice_side < 2) {
    throw Error(ErrorKind::kInvalidParameter,
                "lattice side must be at least 2");
  }
  const double l = lattice_side;
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(lattice_side * lattice_side - 1));
  for (int n1 = 0; n1 < lattice_side; ++n1) {
    for (int n2 = 0; n2 < lattice_side; ++n2) {
      if (n1 == 0 && n2 == 0) continue;
      out.push_back(4.0 - 2.0 * std::cos(2.0 * kPi * n1 / l) -
                    2.0 * std::cos(2.0 * kPi * n2 / l));
    }
  }
  return out;
}

double integrand_decay_bound(std::span<const double> eigenvalues, int sites,
                             double x) {
  double acc = 0.0;
  for (double lambda : eigenvalues) {
    const double u = x / (sites * lambda);
    acc += std::log1p(u * u);
  }
  return std::exp(-0.25 * acc);
}

double decay_cutoff(std::span<const double> eigenvalues, int sites,
                    double bound) {
  std::vector<double> scale;
  scale.reserve(eigenvalues.size());
  for (double lambda : eigenvalues) scale.push_back(1.0 / (sites * lambda));
  const std::vector<double> ones(scale.size(), 1.0);
  return cutoff_for(scale, ones, -4.0 * std::log(bound));
}

BhpParams BhpParams::for_lattice(int lattice_side) {
  if (lattice_side > kMaxLatticeSide) {
    throw Error(ErrorKind::kInvalidParameter,
                "lattice side above 32 is not supported");
  }
  BhpParams p;
  p.lattice_side = lattice_side;
  p.eigenvalues = lattice_eigenvalues(lattice_side);
  p.x_max = decay_cutoff(p.eigenvalues, p.sites(), kDecayBound);
  return p;
}

void BhpParams::validate() const {
  auto fail = [](const std::string& what) {
    throw Error(ErrorKind::kInvalidParameter, "invalid BHP parameters: " + what);
  };
  if (lattice_side < 2 || lattice_side > kMaxLatticeSide) {
    fail("lattice side must be in [2, 32]");
  }
  if (eigenvalues.size() != static_cast<std::size_t>(sites() - 1)) {
    fail("expected N - 1 eigenvalues");
  }
  for (double lambda : eigenvalues) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
      fail("eigenvalues must be positive");
    }
  }
  if (!(x_max > 0.0)) fail("x_max must be positive");
  if (!(grid_min < 0.0 && 0.0 < grid_max)) fail("grid must straddle 0");
  if (!(grid_step > 0.0)) fail("grid step must be positive");
  if (grid_step > kMaxGridStep) fail("grid step above 0.05 is too coarse");
  if (!(quadrature_abs_tol > 0.0)) fail("quadrature tolerance must be positive");
}

std::size_t BhpParams::grid_size() const {
  return static_cast<std::size_t>(
             std::llround((grid_max - grid_min) / grid_step)) +
         1;
}

double BhpParams::grid_point(std::size_t i) const {
  return grid_min + grid_step * static_cast<double>(i);
}

double bhp_support_upper(const BhpParams& params) {
  return make_spectrum(params).support_upper;
}

BhpPointEvaluation bhp_pdf_raw_detailed(double mu, const BhpParams& params,
                                        bool with_imaginary) {
  params.validate();
  return PointEvaluator(params)(mu, with_imaginary);
}

double bhp_pdf_raw(double mu, const BhpParams& params) {
  return bhp_pdf_raw_detailed(mu, params).value;
}

// --- table ----------------------------------------------------------------

BhpTable::BhpTable(BhpParams params, std::vector<double> pdf,
                   std::vector<double> cdf, double normalization_factor)
    : params_(std::move(params)), normalization_factor_(normalization_factor) {
  params_.validate();
  const std::size_t n = params_.grid_size();
  if (pdf.size() != n || cdf.size() != n) {
    throw Error(ErrorKind::kInvalidParameter,
                "table columns do not match the grid size");
  }
  if (!(normalization_factor > 0.0)) {
    throw Error(ErrorKind::kInvalidParameter,
                "normalization factor must be positive");
  }
  pdf_ = UniformPchip(params_.grid_min, params_.grid_step, std::move(pdf));
  cdf_ = UniformPchip(params_.grid_min, params_.grid_step, std::move(cdf));
}

double BhpTable::pdf(double x) const {
  if (x < params_.grid_min || x > params_.grid_max) return 0.0;
  return std::max(0.0, pdf_(x));
}

double BhpTable::cdf(double x) const {
  if (x <= params_.grid_min) return 0.0;
  if (x >= params_.grid_max) return 1.0;
  return std::clamp(cdf_(x), 0.0, 1.0);
}

double BhpTable::quantile(double p) const {
  const auto col = cdf_.values();
  if (p <= col.front()) return params_.grid_min;
  if (p >= col.back()) return params_.grid_max;
  // First node with cdf >= p; the target lies in the cell before it.
  const auto it = std::lower_bound(col.begin(), col.end(), p);
  const auto hi = static_cast<std::size_t>(it - col.begin());
  const std::size_t cell = hi == 0 ? 0 : hi - 1;
  double lo_t = 0.0;
  double hi_t = 1.0;
  for (int iter = 0; iter < 60; ++iter) {
    const double mid = 0.5 * (lo_t + hi_t);
    if (cdf_.eval_cell(cell, mid) < p) {
      lo_t = mid;
    } else {
      hi_t = mid;
    }
  }
  return params_.grid_point(cell) + params_.grid_step * 0.5 * (lo_t + hi_t);
}

double BhpTable::mean() const {
  const auto p = pdf_.values();
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) acc += mu(i) * p[i];
  return acc * params_.grid_step;
}

double BhpTable::standard_deviation() const {
  const double m = mean();
  const auto p = pdf_.values();
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = mu(i) - m;
    acc += d * d * p[i];
  }
  return std::sqrt(acc * params_.grid_step);
}

double BhpTable::third_central_moment() const {
  const double m = mean();
  const auto p = pdf_.values();
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = mu(i) - m;
    acc += d * d * d * p[i];
  }
  return acc * params_.grid_step;
}

BhpTable build_table(const BhpParams& params, unsigned workers) {
  params.validate();
  const std::size_t n = params.grid_size();
  const PointEvaluator evaluate(params);

  std::vector<double> raw(n, 0.0);
  detail::parallel_for(n, workers, [&](std::size_t i) {
    raw[i] = evaluate(params.grid_point(i), false).value;
  });

  // Normalization: composite Simpson over the grid (trapezoid on a trailing
  // odd interval), summed sequentially.
  const double h = params.grid_step;
  const std::size_t intervals = n - 1;
  const std::size_t even = intervals - intervals % 2;
  double acc = raw[0] + raw[even];
  for (std::size_t i = 1; i < even; ++i) acc += raw[i] * (i % 2 ? 4.0 : 2.0);
  double integral = acc * h / 3.0;
  if (even < intervals) integral += 0.5 * h * (raw[n - 2] + raw[n - 1]);
  if (!(integral > 0.0)) {
    throw Error(ErrorKind::kNumericalConvergence,
                "BHP density integrates to zero on the grid");
  }

  std::vector<double> pdf(n);
  for (std::size_t i = 0; i < n; ++i) pdf[i] = raw[i] / integral;

  // Cumulative Simpson: interval [i, i+1] uses the three-point rule anchored
  // forward on even i and backward on odd i, so every pair of intervals sums
  // to the ordinary Simpson panel.
  std::vector<double> cdf(n, 0.0);
  double running = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    double piece = 0.0;
    if (i % 2 == 0 && i + 2 < n) {
      piece = h / 12.0 * (5.0 * pdf[i] + 8.0 * pdf[i + 1] - pdf[i + 2]);
    } else if (i >= 1) {
      piece = h / 12.0 * (-pdf[i - 1] + 8.0 * pdf[i] + 5.0 * pdf[i + 1]);
    } else {
      piece = 0.5 * h * (pdf[i] + pdf[i + 1]);
    }
    running += std::max(0.0, piece);
    cdf[i + 1] = std::clamp(running, 0.0, 1.0);
  }
  return BhpTable(params, std::move(pdf), std::move(cdf), integral);
}

// --- truncation and sampling --------------------------------------------------

TruncatedBhp::TruncatedBhp(const BhpTable& table, double lower, double upper)
    : table_(&table), lower_(lower), upper_(upper) {
  if (!(lower < upper)) {
    throw Error(ErrorKind::kInvalidParameter,
                "truncation interval must satisfy lower < upper");
  }
  lower_cdf_ = table.cdf(lower);
  mass_ = table.cdf(upper) - lower_cdf_;
  if (!(mass_ > kMinTruncationMass)) {
    throw Error(ErrorKind::kInvalidParameter,
                "truncation interval carries no BHP mass");
  }
}

double TruncatedBhp::pdf(double x) const {
  if (x < lower_ || x > upper_) return 0.0;
  return table_->pdf(x) / mass_;
}

double TruncatedBhp::cdf(double x) const {
  if (x <= lower_) return 0.0;
  if (x >= upper_) return 1.0;
  return std::clamp((table_->cdf(x) - lower_cdf_) / mass_, 0.0, 1.0);
}

TruncatedBhp truncate(const BhpTable& table, double lower, double upper) {
  return TruncatedBhp(table, lower, upper);
}

std::vector<double> sample(const TruncatedBhp& trunc, std::size_t count,
                           std::uint64_t seed) {
  std::mt19937_64 engine(seed);
  const double base = trunc.table().cdf(trunc.lower());
  std::vector<double> out(count);
  for (auto& v : out) {
    const double p = base + unit_interval(engine()) * trunc.mass();
    v = std::clamp(trunc.table().quantile(p), trunc.lower(), trunc.upper());
  }
  return out;
}

}  // namespace unifluct
