#pragma once

#include "cldos/csm.hpp"
#include "cldos/types.hpp"

#include <span>
#include <vector>

namespace cldos {

/// Point E - i Gamma / 2 of the complex energy plane.
struct ComplexEnergy {
  double E = 0.0;
  double Gamma = 0.0;

  Complex value() const { return {E, -0.5 * Gamma}; }
  static ComplexEnergy from(Complex z) { return {z.real(), -2.0 * z.imag()}; }
};

/// rho(E) = (i/pi) sum_k 1 / (E - E_k) written out in real and imaginary parts.
/// Throws NumericalError naming the eigenvalue if `at` lies within 1e-14 of a pole.
Complex rho_term(std::span<const Complex> eigenvalues, ComplexEnergy at);
Complex rho_term(const SpectralSet& set, ComplexEnergy at);

/// Continuum level density: rho of the interacting minus rho of the free spectrum.
Complex delta_rho(const SpectralSet& interacting, const SpectralSet& free, ComplexEnergy at);

/// Delta rho sampled along E + i epsilon on a real energy grid.
struct DensityCurve {
  std::vector<double> grid;
  std::vector<Complex> values;
  double epsilon = 0.0;
  double theta = 0.0;
  BoxBasis basis;
};

/// Smoothed density: delta_rho evaluated at E + i epsilon, i.e. Gamma = -2 epsilon.
DensityCurve density_curve(const SpectralSet& interacting, const SpectralSet& free,
                           std::span<const double> grid, double epsilon);

/// Complex phase with d Phi / dE = pi * Delta rho along the grid.
struct PhaseCurve {
  std::vector<double> grid;
  std::vector<Complex> values;
  double reference_energy = 0.0;  // Phi vanishes here
};

/// Closed-form antiderivative sum_k i ln(E + i eps - E_k) - (free), continued along
/// the grid and anchored to zero at the highest grid energy.
/// Throws NumericalError if adjacent grid points differ by more than pi after unwrapping.
PhaseCurve integrate_phase(const DensityCurve& curve, const SpectralSet& interacting,
                           const SpectralSet& free);

struct Rectangle {
  double re_min = 0.0;
  double re_max = 1.0;
  double im_min = -1.0;
  double im_max = 0.0;

  bool contains(Complex z) const {
    return z.real() > re_min && z.real() < re_max && z.imag() > im_min && z.imag() < im_max;
  }
  double boundary_distance(Complex z) const;
};

struct ContourCount {
  long count = 0;         // rounded value of the integral
  Complex integral;       // (1/2) of the clockwise loop integral of Delta rho
  double residual = 0.0;  // |integral - count|
};

/// Counts N_interacting - N_free inside `loop` as half the clockwise loop integral of
/// Delta rho. Each edge is integrated by Gauss-Kronrod to an absolute error of 1e-9:
/// the edge integrals largely cancel, so a relative target would never be met.
/// Throws std::invalid_argument when an eigenvalue is within 1e-9 of the boundary and
/// NumericalError when the residual exceeds 0.01.
ContourCount contour_count(const SpectralSet& interacting, const SpectralSet& free,
                           const Rectangle& loop);

/// Direct count of enclosed eigenvalues (interacting minus free).
long enclosed_difference(const SpectralSet& interacting, const SpectralSet& free,
                         const Rectangle& loop);

}  // namespace cldos
