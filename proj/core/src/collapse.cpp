#include "unifluct/collapse.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "unifluct/error.hpp"

#ifndef UNIFLUCT_VERSION
#define UNIFLUCT_VERSION "0.0.0"
#endif

namespace unifluct {

using ordered_json = nlohmann::ordered_json;

// --- histograms ---------------------------------------------------------------

HistogramSpec HistogramSpec::covering(std::span<const double> values,
                                      std::size_t bin_count) {
  if (values.empty()) {
    throw Error(ErrorKind::kInsufficientData, "histogram of an empty sample");
  }
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  return HistogramSpec{bin_count, *lo, *hi};
}

void HistogramSpec::validate() const {
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw Error(ErrorKind::kInvalidParameter, "histogram range must have lo < hi");
  }
  if (bin_count < 5) {
    throw Error(ErrorKind::kInvalidParameter, "histogram needs at least 5 bins");
  }
}

Histogram histogram(std::span<const double> values, const HistogramSpec& spec) {
  spec.validate();
  if (values.empty()) {
    throw Error(ErrorKind::kInsufficientData, "histogram of an empty sample");
  }
  Histogram out;
  out.spec = spec;
  out.bins.resize(spec.bin_count);
  const double width = spec.width();
  for (std::size_t i = 0; i < spec.bin_count; ++i) {
    out.bins[i].center = spec.lo + width * (static_cast<double>(i) + 0.5);
  }
  for (double v : values) {
    if (v < spec.lo) {
      ++out.below;
      continue;
    }
    if (v > spec.hi) {
      ++out.above;
      continue;
    }
    auto idx = static_cast<std::size_t>((v - spec.lo) / width);
    idx = std::min(idx, spec.bin_count - 1);
    ++out.bins[idx].count;
    ++out.in_range;
  }
  if (out.in_range == 0) {
    throw Error(ErrorKind::kInsufficientData, "no value falls inside the histogram range");
  }
  const double norm = static_cast<double>(out.in_range) * width;
  for (auto& b : out.bins) b.density = static_cast<double>(b.count) / norm;
  return out;
}

namespace {

double safe_log10(double v) { return v > 0.0 ? std::log10(v) : kLog10Sentinel; }

}  // namespace

CollapseTable overlay(const Histogram& hist, const ModelDensity& model) {
  CollapseTable out;
  out.hist = hist;
  out.rows.reserve(hist.bins.size());
  for (const auto& b : hist.bins) {
    CollapseRow row;
    row.center = b.center;
    row.hist_density = b.density;
    row.model_density = model(b.center);
    row.log10_hist = safe_log10(row.hist_density);
    row.log10_model = safe_log10(row.model_density);
    out.rows.push_back(row);
  }
  return out;
}

CollapseTable overlay(const Histogram& hist, const TruncatedBhp& trunc) {
  return overlay(hist, [&trunc](double x) { return trunc.pdf(x); });
}

void write_collapse_tsv(std::ostream& out, const CollapseTable& table) {
  out << "center\thist_density\tmodel_density\n";
  char buf[128];
  for (const auto& r : table.rows) {
    std::snprintf(buf, sizeof buf, "%.17g\t%.17g\t%.17g\n", r.center,
                  r.hist_density, r.model_density);
    out << buf;
  }
}

// --- transformed density --------------------------------------------------------

double TransformedPdf::pdf(double x) const {
  if (!(x > 0.0) || x < support_lo || x > support_hi || table == nullptr) {
    return 0.0;
  }
  const double u = coef_b * std::pow(x, alpha_star) - coef_c;
  return coef_a * std::pow(x, alpha_star - 1.0) * table->pdf(u);
}

double TransformedPdf::cdf(double x) const {
  if (x <= support_lo) return 0.0;
  if (x >= support_hi) return 1.0;
  const double u = coef_b * std::pow(x, alpha_star) - coef_c;
  return std::clamp((table->cdf(u) - table->cdf(lower)) / mass, 0.0, 1.0);
}

bool TransformedPdf::prefactor_discrepancy() const {
  return std::abs(coef_a - paper_coef_a) > 1e-9 * std::abs(coef_a);
}

TransformedPdf transformed_pdf(const FluctuationSet& set,
                               const TruncatedBhp& trunc) {
  if (!(trunc.mass() > kMinTruncationMass)) {
    throw Error(ErrorKind::kInvalidParameter, "zero-mass truncation");
  }
  TransformedPdf tp;
  tp.sign = set.sign;
  tp.alpha_star = set.alpha;
  tp.mu = set.mu_alpha;
  tp.sigma = set.sigma_alpha;
  tp.mass = trunc.mass();
  tp.coef_a = set.alpha / (set.sigma_alpha * trunc.mass());
  tp.coef_b = 1.0 / set.sigma_alpha;
  tp.coef_c = set.mu_alpha / set.sigma_alpha;
  tp.paper_coef_a = set.alpha / set.mu_alpha;
  tp.table = &trunc.table();
  tp.lower = trunc.lower();
  tp.upper = trunc.upper();
  const double inv = 1.0 / set.alpha;
  tp.support_lo = std::pow(std::max(0.0, set.sigma_alpha * tp.lower + set.mu_alpha), inv);
  tp.support_hi = std::pow(set.sigma_alpha * tp.upper + set.mu_alpha, inv);
  return tp;
}

CollapseTable return_collapse(std::span<const double> magnitudes,
                              const TransformedPdf& tp,
                              const HistogramSpec& spec) {
  return overlay(histogram(magnitudes, spec),
                 [&tp](double x) { return tp.pdf(x); });
}

// --- report ------------------------------------------------------------------------

std::string library_version() { return UNIFLUCT_VERSION; }

namespace {

ordered_json collapse_json(const CollapseTable& t) {
  ordered_json j;
  j["bin_count"] = t.hist.spec.bin_count;
  j["lo"] = t.hist.spec.lo;
  j["hi"] = t.hist.spec.hi;
  j["in_range"] = t.hist.in_range;
  j["below"] = t.hist.below;
  j["above"] = t.hist.above;
  j["log10_sentinel"] = kLog10Sentinel;
  ordered_json center = ordered_json::array();
  ordered_json hist = ordered_json::array();
  ordered_json model = ordered_json::array();
  ordered_json log_hist = ordered_json::array();
  ordered_json log_model = ordered_json::array();
  ordered_json counts = ordered_json::array();
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    center.push_back(r.center);
    counts.push_back(t.hist.bins[i].count);
    hist.push_back(r.hist_density);
    model.push_back(r.model_density);
    log_hist.push_back(r.log10_hist);
    log_model.push_back(r.log10_model);
  }
  j["center"] = std::move(center);
  j["count"] = std::move(counts);
  j["hist_density"] = std::move(hist);
  j["model_density"] = std::move(model);
  j["log10_hist_density"] = std::move(log_hist);
  j["log10_model_density"] = std::move(log_model);
  return j;
}

ordered_json table_json(const BhpTable& table) {
  const BhpParams& p = table.params();
  ordered_json j;
  j["L"] = p.lattice_side;
  j["N"] = p.sites();
  j["x_max"] = p.x_max;
  j["grid_min"] = p.grid_min;
  j["grid_max"] = p.grid_max;
  j["grid_step"] = p.grid_step;
  j["quadrature_abs_tol"] = p.quadrature_abs_tol;
  j["normalization_factor"] = table.normalization_factor();
  j["support_upper"] = bhp_support_upper(p);
  return j;
}

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

ordered_json report(const ReportMeta& meta, const SignCounts& counts,
                    std::span<const SignAnalysis> analyses) {
  ordered_json doc;

  ordered_json m;
  m["tool"] = meta.tool;
  m["version"] = meta.version.empty() ? library_version() : meta.version;
  m["command"] = meta.command;
  m["input"] = meta.input_path;
  m["input_sha256"] = meta.input_sha256;
  m["parameters"] = meta.parameters;
  if (meta.table != nullptr) m["bhp_table"] = table_json(*meta.table);
  doc["meta"] = std::move(m);

  ordered_json c;
  c["prices"] = counts.prices;
  c["returns"] = counts.returns;
  c["positive"] = counts.positive;
  c["negative"] = counts.negative;
  c["zero"] = counts.zeros;
  c["ratio_over_returns"] = {{"positive", ratio(counts.positive, counts.returns)},
                             {"negative", ratio(counts.negative, counts.returns)}};
  c["ratio_over_days"] = {{"positive", ratio(counts.positive, counts.prices)},
                          {"negative", ratio(counts.negative, counts.prices)}};
  doc["counts"] = std::move(c);

  ordered_json scan = ordered_json::object();
  ordered_json stats = ordered_json::object();
  ordered_json ks = ordered_json::object();
  ordered_json transformed = ordered_json::object();
  ordered_json histograms = ordered_json::object();
  ordered_json curves = ordered_json::object();

  for (const auto& a : analyses) {
    const std::string key(to_string(a.sign));
    if (a.scan) {
      const ScanCurve& sc = a.scan->curve;
      ordered_json s;
      s["alphas"] = sc.alphas;
      s["p_values"] = sc.p_values;
      s["d_stats"] = sc.d_stats;
      s["alpha_star"] = sc.alpha_star;
      s["p_star"] = sc.p_star;
      s["grid_step"] = sc.grid_step;
      s["failures"] = sc.failures;
      scan[key] = std::move(s);
    }

    ordered_json st;
    st["alpha"] = a.set.alpha;
    st["n"] = a.set.count();
    st["mu"] = a.set.mu_alpha;
    st["sigma"] = a.set.sigma_alpha;
    st["l_min"] = a.set.l_min;
    st["r_max"] = a.set.r_max;
    stats[key] = std::move(st);

    ordered_json k;
    k["d_stat"] = a.ks.d_stat;
    k["n"] = a.ks.n;
    k["p_value"] = a.ks.p_value;
    k["d_location"] = a.ks.d_location;
    k["ties"] = a.ks.ties;
    ks[key] = std::move(k);

    const TransformedPdf& tp = a.transformed;
    ordered_json t;
    t["alpha"] = tp.alpha_star;
    t["coef_a"] = tp.coef_a;
    t["coef_b"] = tp.coef_b;
    t["coef_c"] = tp.coef_c;
    t["paper_coef_a"] = tp.paper_coef_a;
    t["mass"] = tp.mass;
    t["support"] = {tp.support_lo, tp.support_hi};
    t["coef_a_formula"] = "alpha / (sigma * mass)";
    t["paper_coef_a_formula"] = "alpha / mu";
    t["prefactor_discrepancy"] = tp.prefactor_discrepancy();
    transformed[key] = std::move(t);

    ordered_json h;
    h["fluctuations"] = collapse_json(a.fluctuation_collapse);
    h["returns"] = collapse_json(a.return_collapse);
    histograms[key] = std::move(h);

    ordered_json dc;
    ordered_json xs = ordered_json::array();
    ordered_json ds = ordered_json::array();
    for (const auto& p : a.distance_curve) {
      xs.push_back(p.x);
      ds.push_back(p.distance);
    }
    dc["x"] = std::move(xs);
    dc["distance"] = std::move(ds);
    curves[key] = std::move(dc);
  }

  doc["scan"] = std::move(scan);
  doc["stats"] = std::move(stats);
  doc["ks"] = std::move(ks);
  doc["transformed"] = std::move(transformed);
  doc["histograms"] = std::move(histograms);
  doc["distance_curves"] = std::move(curves);
  return doc;
}

}  // namespace unifluct
