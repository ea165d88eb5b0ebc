#pragma once

#include <cmath>
#include <cstddef>
#include <type_traits>

namespace unifluct {

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;  // sum of per-panel Richardson estimates
  std::size_t evaluations = 0;
  bool converged = true;
};

namespace detail {

template <class F>
struct SimpsonPanel {
  F& f;
  int max_depth;
  std::size_t max_evaluations;
  QuadratureResult& out;

  // Recursive step on [a, b] with midpoint m and the three-point estimate
  // `whole` already known.
  double refine(double a, double m, double b, double fa, double fm, double fb,
                double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    out.evaluations += 2;
    const double h = b - a;
    const double left = (h / 12.0) * (fa + 4.0 * flm + fm);
    const double right = (h / 12.0) * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (std::abs(delta) <= 15.0 * tol) {
      out.error_estimate += std::abs(delta) / 15.0;
      return left + right + delta / 15.0;
    }
    if (depth >= max_depth || out.evaluations >= max_evaluations) {
      out.converged = false;
      out.error_estimate += std::abs(delta) / 15.0;
      return left + right + delta / 15.0;
    }
    return refine(a, lm, m, fa, flm, fm, left, 0.5 * tol, depth + 1) +
           refine(m, rm, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
  }
};

}  // namespace detail

/// Adaptive Simpson quadrature of `f` over [a, b].
///
/// The interval is first cut into `panels` equal pieces (an oscillatory
/// integrand can fool a single three-point start), and each piece receives a
/// share of `abs_tol` proportional to its width. `converged` is false when any
/// panel hit `max_depth`, or the evaluation budget ran out, before meeting its
/// tolerance.
template <class F>
QuadratureResult adaptive_simpson(F&& f, double a, double b, double abs_tol,
                                  int panels = 1, int max_depth = 40,
                                  std::size_t max_evaluations = 1u << 22) {
  QuadratureResult out;
  if (!(b > a)) return out;
  detail::SimpsonPanel<std::remove_reference_t<F>> rec{f, max_depth, max_evaluations, out};
  const double width = (b - a) / panels;
  double fa = f(a);
  out.evaluations += 1;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * width;
    const double hi = (p + 1 == panels) ? b : a + (p + 1) * width;
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    const double fb = f(hi);
    out.evaluations += 2;
    const double whole = ((hi - lo) / 6.0) * (fa + 4.0 * fm + fb);
    out.value +=
        rec.refine(lo, mid, hi, fa, fm, fb, whole, abs_tol / panels, 0);
    fa = fb;
  }
  return out;
}

/// Composite Simpson rule with a fixed number of intervals (rounded up to
/// even). No adaptivity; used where a deterministic reference is wanted.
template <class F>
double fixed_simpson(F&& f, double a, double b, std::size_t intervals) {
  if (intervals % 2 != 0) ++intervals;
  const double h = (b - a) / static_cast<double>(intervals);
  double sum = f(a) + f(b);
  for (std::size_t i = 1; i < intervals; ++i) {
    sum += f(a + h * static_cast<double>(i)) * ((i % 2 != 0) ? 4.0 : 2.0);
  }
  return sum * h / 3.0;
}

}  // namespace unifluct
