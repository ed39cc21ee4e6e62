#pragma once

#include <functional>

namespace rdiff::quad {

struct Result {
  double value = 0.0;
  double error = 0.0;  // estimated absolute error
};

/// Adaptive 61-point Gauss-Kronrod on [a, b] with relative tolerance `rel_tol`.
Result integrate(const std::function<double(double)>& f, double a, double b, double rel_tol = 1e-12,
                 unsigned max_depth = 25);

/// Tensor-product (iterated) adaptive Gauss-Kronrod over [ax, bx] x [ay, by].
Result integrate_2d(const std::function<double(double, double)>& f, double ax, double bx, double ay, double by,
                    double rel_tol = 1e-11, unsigned max_depth = 20);

/// Integral over the annulus r_in <= |y| <= r_out in polar coordinates.
Result integrate_annulus(const std::function<double(double, double)>& f, double r_in, double r_out,
                         double rel_tol = 1e-11, unsigned max_depth = 20);

}  // namespace rdiff::quad
