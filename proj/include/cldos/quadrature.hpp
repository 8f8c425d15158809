#pragma once

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <utility>

namespace cldos::quad {

/// Adaptive Gauss-Kronrod (7/15) on [a, b]; works for real and complex integrands.
/// Returns the estimate and writes the error estimate to *error when given.
template <class F>
auto adaptive(F&& f, double a, double b, double tol = 1e-12, unsigned max_depth = 30,
              double* error = nullptr) {
  double err = 0.0;
  auto r = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(std::forward<F>(f), a, b,
                                                                         max_depth, tol, &err);
  if (error) *error = err;
  return r;
}

/// Adaptive Gauss-Kronrod (7/15) with an absolute error target: a panel is accepted
/// when its error estimate is below its share of `abs_tol`, or below 1e-12 of the
/// panel's L1 norm (roundoff in the integrand). Suited to integrands whose net integral
/// cancels, where a relative target is unreachable. Panels that reach `max_depth` are
/// accepted as is; all accepted error estimates are summed into *error.
template <class F>
auto adaptive_absolute(F&& f, double a, double b, double abs_tol, unsigned max_depth = 50,
                       double* error = nullptr) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  using R = decltype(f(a));
  double total_error = 0.0;
  auto panel = [&](auto&& self, double lo, double hi, double tol, unsigned depth) -> R {
    double err = 0.0;
    double l1 = 0.0;
    const R r = GK::integrate(f, lo, hi, 0, 0.0, &err, &l1);
    err *= 0.5 * (hi - lo);  // a single pass reports the error on the reference interval [-1, 1]
    if (err <= tol || err <= 1e-12 * l1 || depth == 0) {
      total_error += err;
      return r;
    }
    const double mid = 0.5 * (lo + hi);
    return self(self, lo, mid, 0.5 * tol, depth - 1) + self(self, mid, hi, 0.5 * tol, depth - 1);
  };
  const R r = panel(panel, a, b, abs_tol, max_depth);
  if (error) *error = total_error;
  return r;
}

/// Fixed 100-point Gauss-Legendre rule on [a, b].
template <class F>
double gauss100(F&& f, double a, double b) {
  return boost::math::quadrature::gauss<double, 100>::integrate(std::forward<F>(f), a, b);
}

}  // namespace cldos::quad
