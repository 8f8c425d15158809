#include "cldos/density.hpp"

#include "cldos/quadrature.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace cldos {

Complex rho_term(std::span<const Complex> eigenvalues, ComplexEnergy at) {
  double re = 0.0;
  double im = 0.0;
  for (const Complex& ek : eigenvalues) {
    const double dE = at.E - ek.real();
    const double dG = at.Gamma - (-2.0 * ek.imag());
    const double den = dE * dE + 0.25 * dG * dG;
    if (den < 1e-28) {
      std::ostringstream msg;
      msg << "rho_term: evaluation point (" << at.E << ", Gamma=" << at.Gamma
          << ") coincides with eigenvalue " << ek;
      throw NumericalError(msg.str());
    }
    re += -0.5 * dG / den;
    im += dE / den;
  }
  return {re / kPi, im / kPi};
}

Complex rho_term(const SpectralSet& set, ComplexEnergy at) {
  return rho_term(std::span<const Complex>(set.eigenvalues.data(), set.eigenvalues.size()), at);
}

Complex delta_rho(const SpectralSet& interacting, const SpectralSet& free, ComplexEnergy at) {
  return rho_term(interacting, at) - rho_term(free, at);
}

DensityCurve density_curve(const SpectralSet& interacting, const SpectralSet& free,
                           std::span<const double> grid, double epsilon) {
  if (!(epsilon >= 0.0)) throw std::invalid_argument("density_curve: epsilon must be >= 0");
  DensityCurve out;
  out.grid.assign(grid.begin(), grid.end());
  out.epsilon = epsilon;
  out.theta = interacting.theta;
  out.basis = interacting.basis;
  out.values.reserve(grid.size());
  for (double E : grid) out.values.push_back(delta_rho(interacting, free, {E, -2.0 * epsilon}));
  return out;
}

namespace {

// sum_k i ln(z - E_k); every term stays on the principal branch while Im z > Im E_k.
Complex log_sum(const VectorXcd& ev, Complex z) {
  Complex s{0.0, 0.0};
  for (Eigen::Index k = 0; k < ev.size(); ++k) s += std::log(z - ev(k));
  return Complex{0.0, 1.0} * s;
}

}  // namespace

PhaseCurve integrate_phase(const DensityCurve& curve, const SpectralSet& interacting,
                           const SpectralSet& free) {
  PhaseCurve out;
  out.grid = curve.grid;
  const std::size_t n = curve.grid.size();
  if (n == 0) return out;
  out.values.resize(n);
  const double two_pi = 2.0 * kPi;
  for (std::size_t i = 0; i < n; ++i) {
    const Complex z{curve.grid[i], curve.epsilon};
    out.values[i] = log_sum(interacting.eigenvalues, z) - log_sum(free.eigenvalues, z);
  }
  // Continue Re Phi along the grid: pick the 2 pi multiple closest to the increment
  // predicted by the trapezoid rule on pi * Re(Delta rho).
  double shift = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    const double expected = 0.5 * kPi * (curve.values[i].real() + curve.values[i - 1].real()) *
                            (curve.grid[i] - curve.grid[i - 1]);
    const double raw = out.values[i].real() + shift - out.values[i - 1].real();
    const double wraps = std::round((raw - expected) / two_pi);
    shift -= wraps * two_pi;
    const double step = raw - wraps * two_pi;
    if (std::abs(step - expected) > 0.5 * kPi) {
      std::ostringstream msg;
      msg << "integrate_phase: cannot continue the phase between E=" << curve.grid[i - 1]
          << " and E=" << curve.grid[i] << "; refine the grid";
      throw NumericalError(msg.str());
    }
    out.values[i] += shift;
  }
  const Complex anchor = out.values.back();
  for (auto& v : out.values) v -= anchor;
  out.reference_energy = curve.grid.back();
  return out;
}

double Rectangle::boundary_distance(Complex z) const {
  const double x = z.real();
  const double y = z.imag();
  auto seg = [](double t, double lo, double hi) { return t < lo ? lo - t : (t > hi ? t - hi : 0.0); };
  const double dx_out = seg(x, re_min, re_max);
  const double dy_out = seg(y, im_min, im_max);
  if (dx_out > 0.0 || dy_out > 0.0) return std::hypot(dx_out, dy_out);
  return std::min({x - re_min, re_max - x, y - im_min, im_max - y});
}

long enclosed_difference(const SpectralSet& interacting, const SpectralSet& free,
                         const Rectangle& loop) {
  long n = 0;
  for (Eigen::Index k = 0; k < interacting.eigenvalues.size(); ++k)
    n += loop.contains(interacting.eigenvalues(k)) ? 1 : 0;
  for (Eigen::Index k = 0; k < free.eigenvalues.size(); ++k)
    n -= loop.contains(free.eigenvalues(k)) ? 1 : 0;
  return n;
}

ContourCount contour_count(const SpectralSet& interacting, const SpectralSet& free,
                           const Rectangle& loop) {
  if (!(loop.re_min < loop.re_max && loop.im_min < loop.im_max))
    throw std::invalid_argument("contour_count: degenerate rectangle");
  for (const SpectralSet* set : {&interacting, &free}) {
    for (Eigen::Index k = 0; k < set->eigenvalues.size(); ++k) {
      if (loop.boundary_distance(set->eigenvalues(k)) <= 1e-9) {
        std::ostringstream msg;
        msg << "contour_count: eigenvalue " << set->eigenvalues(k) << " lies on the contour";
        throw std::invalid_argument(msg.str());
      }
    }
  }

  const Complex i_over_pi{0.0, 1.0 / kPi};
  auto drho = [&](Complex z) {
    Complex s{0.0, 0.0};
    for (Eigen::Index k = 0; k < interacting.eigenvalues.size(); ++k)
      s += 1.0 / (z - interacting.eigenvalues(k));
    for (Eigen::Index k = 0; k < free.eigenvalues.size(); ++k) s -= 1.0 / (z - free.eigenvalues(k));
    return i_over_pi * s;
  };
  const Complex iu{0.0, 1.0};
  const double tol = 1e-9;
  const unsigned depth = 50;

  // Clockwise: top (left to right), right (down), bottom (right to left), left (up).
  const Complex top =
      quad::adaptive_absolute([&](double x) { return drho({x, loop.im_max}); }, loop.re_min, loop.re_max, tol, depth);
  const Complex right =
      quad::adaptive_absolute([&](double y) { return drho({loop.re_max, y}); }, loop.im_min, loop.im_max, tol, depth);
  const Complex bottom =
      quad::adaptive_absolute([&](double x) { return drho({x, loop.im_min}); }, loop.re_min, loop.re_max, tol, depth);
  const Complex left =
      quad::adaptive_absolute([&](double y) { return drho({loop.re_min, y}); }, loop.im_min, loop.im_max, tol, depth);
  const Complex loop_integral = top - iu * right - bottom + iu * left;

  ContourCount out;
  out.integral = 0.5 * loop_integral;
  out.count = std::lround(out.integral.real());
  out.residual = std::abs(out.integral - Complex(double(out.count), 0.0));
  if (out.residual > 0.01) {
    std::ostringstream msg;
    msg << "contour_count: residual " << out.residual << " after quadrature; refine";
    throw NumericalError(msg.str());
  }
  return out;
}

}  // namespace cldos
