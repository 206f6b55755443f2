#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

// Boost 1.74's pchip calls isnan unqualified.
using std::isnan;
#include <boost/math/interpolators/pchip.hpp>
#include <boost/math/quadrature/gauss.hpp>

namespace driftctl::numerics {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Adaptive Gauss-Kronrod (7/15) on [a, b] to relative tolerance rel_tol.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol = 1e-10);

/// Same, but with forced panel boundaries at every point of `breaks` that
/// falls strictly inside (a, b). `breaks` must be sorted ascending.
double integrate_split(const std::function<double(double)>& f, double a,
                       double b, std::span<const double> breaks,
                       double rel_tol = 1e-10);

/// Fixed-order Gauss-Legendre rules. Only for integrands known to be smooth on
/// [a, b]; no error control.
template <class F>
double gauss10(F&& f, double a, double b) {
  if (a == b) return 0.0;
  return boost::math::quadrature::gauss<double, 10>::integrate(f, a, b);
}

template <class F>
double gauss20(F&& f, double a, double b) {
  if (a == b) return 0.0;
  return boost::math::quadrature::gauss<double, 20>::integrate(f, a, b);
}

inline double log_add_exp(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

/// Bracketed root of a monotone function on [lo, hi] (f(lo), f(hi) of opposite
/// sign) by TOMS 748. Stops when the bracket is below rel_tol relative width or
/// after max_iter evaluations.
double find_root(const std::function<double(double)>& f, double lo, double hi,
                 double f_lo, double f_hi, double rel_tol,
                 std::uintmax_t max_iter = 200);

/// Shape-preserving piecewise cubic interpolant over a strictly increasing
/// abscissa. Values outside the table are clamped to the end points.
class MonotoneTable {
 public:
  MonotoneTable() = default;
  MonotoneTable(std::vector<double> x, std::vector<double> y,
                double left_slope = std::numeric_limits<double>::quiet_NaN(),
                double right_slope = std::numeric_limits<double>::quiet_NaN());

  double operator()(double x) const;
  double front_x() const { return x_front_; }
  double back_x() const { return x_back_; }
  bool empty() const { return !interp_ && short_x_.empty(); }

 private:
  using Interp = boost::math::interpolators::pchip<std::vector<double>>;
  std::shared_ptr<const Interp> interp_;
  // Fallback for tables too short for a cubic: piecewise linear.
  std::vector<double> short_x_, short_y_;
  double x_front_ = 0.0;
  double x_back_ = 0.0;
};

/// Index i such that grid[i] <= x < grid[i+1], clamped to [0, n-2].
std::size_t locate(std::span<const double> grid, double x);

}  // namespace driftctl::numerics
