#include "rdiff/quadrature.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace rdiff::quad {

using GK = boost::math::quadrature::gauss_kronrod<double, 61>;

Result integrate(const std::function<double(double)>& f, double a, double b, double rel_tol, unsigned max_depth) {
  if (a == b) return {};
  double err = 0.0;
  const double v = GK::integrate(f, a, b, max_depth, rel_tol, &err);
  return {v, err};
}

Result integrate_2d(const std::function<double(double, double)>& f, double ax, double bx, double ay, double by,
                    double rel_tol, unsigned max_depth) {
  double inner_err_max = 0.0;
  auto outer = [&](double x) {
    auto inner = [&](double y) { return f(x, y); };
    double err = 0.0;
    const double v = GK::integrate(inner, ay, by, max_depth, rel_tol * 0.1, &err);
    inner_err_max = std::max(inner_err_max, err);
    return v;
  };
  double err = 0.0;
  const double v = GK::integrate(outer, ax, bx, max_depth, rel_tol, &err);
  return {v, err + inner_err_max * (bx - ax)};
}

Result integrate_annulus(const std::function<double(double, double)>& f, double r_in, double r_out, double rel_tol,
                         unsigned max_depth) {
  double inner_err_max = 0.0;
  auto radial = [&](double r) {
    auto angular = [&](double t) { return f(r * std::cos(t), r * std::sin(t)); };
    double err = 0.0;
    const double v = GK::integrate(angular, 0.0, 2.0 * std::numbers::pi, max_depth, rel_tol * 0.1, &err);
    inner_err_max = std::max(inner_err_max, err * r);
    return r * v;
  };
  double err = 0.0;
  const double v = GK::integrate(radial, r_in, r_out, max_depth, rel_tol, &err);
  return {v, err + inner_err_max * (r_out - r_in)};
}

}  // namespace rdiff::quad
