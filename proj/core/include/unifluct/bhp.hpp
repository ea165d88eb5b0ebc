#pragma once

// Bramwell-Holdsworth-Pinton (BHP) density of the 2dXY spin-wave model on a
// periodic L x L lattice, evaluated from its characteristic-function integral,
// tabulated once, then queried by interpolation.

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "unifluct/interpolation.hpp"

namespace unifluct {

/// Spectrum of the periodic L x L lattice Laplacian with the zero mode
/// removed: 4 - 2cos(2 pi n1 / L) - 2cos(2 pi n2 / L), (n1, n2) row-major over
/// {0..L-1}^2 minus (0, 0). Throws kInvalidParameter for L < 2.
std::vector<double> lattice_eigenvalues(int lattice_side);

/// Upper bound on the modulus of the real-axis integrand,
/// prod_k (1 + x^2 / (N^2 lambda_k^2))^(-1/4).
double integrand_decay_bound(std::span<const double> eigenvalues,
                             int sites, double x);

/// Smallest x with integrand_decay_bound(x) <= bound.
double decay_cutoff(std::span<const double> eigenvalues, int sites,
                    double bound);

inline constexpr double kDecayBound = 1e-14;
inline constexpr double kMaxGridStep = 0.05;
inline constexpr int kMaxLatticeSide = 32;

struct BhpParams {
  int lattice_side = 10;
  std::vector<double> eigenvalues;  // N - 1 entries
  double x_max = 0.0;
  double grid_min = -10.0;
  double grid_max = 15.0;
  double grid_step = 1e-3;
  double quadrature_abs_tol = 1e-10;

  int sites() const { return lattice_side * lattice_side; }

  /// Eigenvalues from lattice_eigenvalues(L) and x_max from the decay bound.
  static BhpParams for_lattice(int lattice_side = 10);

  /// Throws kInvalidParameter on any broken invariant.
  void validate() const;

  std::size_t grid_size() const;
  double grid_point(std::size_t i) const;
};

/// Diagnostics of a single density evaluation.
struct BhpPointEvaluation {
  double value = 0.0;
  double error_estimate = 0.0;  // absolute, in density units
  double imag_residual = 0.0;   // only filled when requested
  double contour_shift = 0.0;   // Im x of the integration path
  double path_length = 0.0;     // upper limit of the symmetric real part
  std::size_t evaluations = 0;
};

/// Largest mu with nonzero density. For finite N the density is that of a
/// finite weighted sum of centred chi-square variables and vanishes above
/// sum_k 1/(2 N lambda_k) / sigma.
double bhp_support_upper(const BhpParams& params);

/// Unnormalized density from the characteristic-function integral. The
/// integral is taken along the horizontal line through the saddle point of
/// its envelope, which is exact by analyticity and keeps the tails accurate
/// in relative terms. Throws kNumericalConvergence when the adaptive rule
/// cannot meet quadrature_abs_tol.
double bhp_pdf_raw(double mu, const BhpParams& params);

/// As bhp_pdf_raw, with diagnostics. When `with_imaginary` is set the
/// imaginary part of the full-line integral is integrated too (it is zero in
/// exact arithmetic).
BhpPointEvaluation bhp_pdf_raw_detailed(double mu, const BhpParams& params,
                                        bool with_imaginary = false);

/// Tabulated, renormalized BHP density and distribution function.
class BhpTable {
 public:
  /// Assembles a table from already-normalized columns (used by build_table
  /// and the cache loader). Checks the column shapes against params.
  BhpTable(BhpParams params, std::vector<double> pdf, std::vector<double> cdf,
           double normalization_factor);

  const BhpParams& params() const { return params_; }
  double normalization_factor() const { return normalization_factor_; }

  std::size_t size() const { return pdf_.size(); }
  double mu(std::size_t i) const { return params_.grid_point(i); }
  std::span<const double> pdf_column() const { return pdf_.values(); }
  std::span<const double> cdf_column() const { return cdf_.values(); }

  double pdf(double x) const;
  double cdf(double x) const;

  /// Inverse of cdf() restricted to the grid, by bisection inside the cell.
  double quantile(double p) const;

  double mean() const;
  double standard_deviation() const;
  double third_central_moment() const;

 private:
  BhpParams params_;
  UniformPchip pdf_;
  UniformPchip cdf_;
  double normalization_factor_;
};

/// Evaluates the raw density on the grid (optionally on `workers` threads,
/// 0 = hardware concurrency), divides by its Simpson integral and accumulates
/// the cdf with the cumulative Simpson rule. Bit-identical for any worker
/// count.
BhpTable build_table(const BhpParams& params, unsigned workers = 0);

inline double pdf(double x, const BhpTable& table) { return table.pdf(x); }
inline double cdf(double x, const BhpTable& table) { return table.cdf(x); }

/// BHP law conditioned on [lower, upper]. Holds a non-owning pointer to the
/// table, which must outlive it.
class TruncatedBhp {
 public:
  TruncatedBhp(const BhpTable& table, double lower, double upper);

  const BhpTable& table() const { return *table_; }
  double lower() const { return lower_; }
  double upper() const { return upper_; }
  double mass() const { return mass_; }

  double pdf(double x) const;
  double cdf(double x) const;

 private:
  const BhpTable* table_;
  double lower_;
  double upper_;
  double lower_cdf_;
  double mass_;
};

inline constexpr double kMinTruncationMass = 1e-6;

/// Throws kInvalidParameter when lower >= upper or the mass is <= 1e-6.
TruncatedBhp truncate(const BhpTable& table, double lower, double upper);

/// Inverse-cdf samples of the truncated law; deterministic in `seed`.
std::vector<double> sample(const TruncatedBhp& trunc, std::size_t count,
                           std::uint64_t seed);

/// Uniform double in [0, 1) from a 64-bit engine output, identical on every
/// platform (std::uniform_real_distribution is not).
inline double unit_interval(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Cache file (tab-separated text, see README).

inline constexpr int kTableFormatVersion = 1;

void write_table(const BhpTable& table, const std::filesystem::path& path);

/// Reads a cache file. Throws kParse on malformed content.
BhpTable read_table(const std::filesystem::path& path);

/// True when the header of the cache at `path` records exactly `params`.
bool cache_matches(const std::filesystem::path& path, const BhpParams& params);

struct CachedTable {
  BhpTable table;
  bool rebuilt;
};

/// Loads the cache when it matches `params`, otherwise builds the table and
/// (re)writes the file.
CachedTable load_or_build_table(const std::filesystem::path& path,
                                const BhpParams& params, unsigned workers = 0);

}  // namespace unifluct
