#pragma once

#include <span>
#include <vector>

namespace unifluct {

/// Monotone piecewise-cubic Hermite interpolant on a uniform grid
/// (Fritsch-Carlson slopes). Passes through every node exactly, and is
/// monotone on any interval where the data are monotone, so it never
/// overshoots a local extremum of the data.
class UniformPchip {
 public:
  UniformPchip() = default;
  UniformPchip(double x0, double step, std::vector<double> values);

  /// Value at x; x is clamped to the grid.
  double operator()(double x) const;

  /// Cell index i such that x lies in [x_i, x_{i+1}], clamped.
  std::size_t cell(double x) const;

  /// Value inside a known cell at local coordinate t in [0, 1].
  double eval_cell(std::size_t i, double t) const;

  double x0() const { return x0_; }
  double step() const { return step_; }
  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }

 private:
  double x0_ = 0.0;
  double step_ = 1.0;
  std::vector<double> values_;
  std::vector<double> slopes_;  // dy/dx at nodes
};

}  // namespace unifluct
