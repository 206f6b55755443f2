#include "numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/toms748_solve.hpp>

namespace driftctl::numerics {

namespace {

using Kronrod = boost::math::quadrature::gauss_kronrod<double, 15>;
using Gauss7 = boost::math::quadrature::gauss<double, 7>;

struct Panel {
  double value;
  double error;
  double l1;
};

// One 15-point Kronrod panel with its embedded 7-point Gauss estimate.
Panel kronrod_panel(const std::function<double(double)>& f, double a,
                    double b) {
  const auto& x = Kronrod::abscissa();
  const auto& wk = Kronrod::weights();
  const auto& wg = Gauss7::weights();
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double f0 = f(mid);
  double k = f0 * wk[0];
  double l1 = std::abs(k);
  double g = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    const double fp = f(mid + half * x[i]);
    const double fm = f(mid - half * x[i]);
    k += (fp + fm) * wk[i];
    l1 += (std::abs(fp) + std::abs(fm)) * wk[i];
    if (i % 2 == 0) g += (fp + fm) * wg[i / 2];
  }
  g += f0 * wg[0];
  return {half * k, std::abs(half * (k - g)), std::abs(half) * l1};
}

double adapt(const std::function<double(double)>& f, double a, double b,
             const Panel& whole, double abs_tol, unsigned depth) {
  const double floor = 64.0 * std::numeric_limits<double>::epsilon() * whole.l1;
  if (depth == 0 || whole.error <= std::max(abs_tol, floor)) return whole.value;
  const double m = 0.5 * (a + b);
  if (!(m > a && m < b)) return whole.value;
  const Panel left = kronrod_panel(f, a, m);
  const Panel right = kronrod_panel(f, m, b);
  if (left.error + right.error <= std::max(abs_tol, floor))
    return left.value + right.value;
  return adapt(f, a, m, left, 0.5 * abs_tol, depth - 1) +
         adapt(f, m, b, right, 0.5 * abs_tol, depth - 1);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol) {
  if (a == b) return 0.0;
  if (a > b) return -integrate(f, b, a, rel_tol);
  const Panel whole = kronrod_panel(f, a, b);
  return adapt(f, a, b, whole, rel_tol * whole.l1, 30);
}

double integrate_split(const std::function<double(double)>& f, double a,
                       double b, std::span<const double> breaks,
                       double rel_tol) {
  double total = 0.0;
  double left = a;
  auto it = std::upper_bound(breaks.begin(), breaks.end(), a);
  for (; it != breaks.end() && *it < b; ++it) {
    total += integrate(f, left, *it, rel_tol);
    left = *it;
  }
  total += integrate(f, left, b, rel_tol);
  return total;
}

double find_root(const std::function<double(double)>& f, double lo, double hi,
                 double f_lo, double f_hi, double rel_tol,
                 std::uintmax_t max_iter) {
  if (f_lo == 0.0) return lo;
  if (f_hi == 0.0) return hi;
  auto tol = [rel_tol](double x, double y) {
    return std::abs(x - y) <= rel_tol * std::max(std::abs(x), std::abs(y));
  };
  std::uintmax_t iters = max_iter;
  auto [l, h] = boost::math::tools::toms748_solve(f, lo, hi, f_lo, f_hi, tol,
                                                  iters);
  return 0.5 * (l + h);
}

MonotoneTable::MonotoneTable(std::vector<double> x, std::vector<double> y,
                             double left_slope, double right_slope) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("MonotoneTable: need >= 2 matching points");
  x_front_ = x.front();
  x_back_ = x.back();
  if (x.size() < 4) {
    short_x_ = std::move(x);
    short_y_ = std::move(y);
    return;
  }
  interp_ = std::make_shared<const Interp>(std::move(x), std::move(y),
                                           left_slope, right_slope);
}

double MonotoneTable::operator()(double x) const {
  x = std::clamp(x, x_front_, x_back_);
  if (interp_) return (*interp_)(x);
  const std::size_t i = locate(short_x_, x);
  const double t = (x - short_x_[i]) / (short_x_[i + 1] - short_x_[i]);
  return short_y_[i] + t * (short_y_[i + 1] - short_y_[i]);
}

std::size_t locate(std::span<const double> grid, double x) {
  const std::size_t n = grid.size();
  if (n < 2) return 0;
  auto it = std::upper_bound(grid.begin(), grid.end(), x);
  std::size_t i = (it == grid.begin()) ? 0 : std::size_t(it - grid.begin()) - 1;
  return std::min(i, n - 2);
}

}  // namespace driftctl::numerics
