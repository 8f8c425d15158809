#pragma once

#include "cldos/model.hpp"
#include "cldos/types.hpp"

#include <optional>
#include <vector>

namespace cldos {

/// Particle-in-a-box sine basis on [-L/2, L/2]:
/// phi_n(x) = sqrt(2/L) sin(kappa_n (x + L/2)), kappa_n = n pi / L, n = 1..N.
struct BoxBasis {
  double L = 100.0;
  int N = 1500;

  double kappa(int n) const { return n * kPi / L; }
  void validate() const;
  bool operator==(const BoxBasis&) const = default;
};

/// Complex-scaled Hamiltonian H(theta) = e^{-2i theta} p^2/2m + V(e^{i theta} x)
/// in the box basis. `potential` is empty for the free Hamiltonian.
struct ScaledHamiltonian {
  double theta = 0.0;
  MatrixXcd matrix;  // complex symmetric
  BoxBasis basis;
  Classicality classicality;
  std::optional<PotentialSpec> potential;
};

enum class SpectralLabel { resonance, background };

/// Eigenvalues E_k - i Gamma_k / 2 of a scaled Hamiltonian, ascending by real part.
/// `labels` is empty until classify() has been applied.
struct SpectralSet {
  VectorXcd eigenvalues;
  std::vector<SpectralLabel> labels;
  double theta = 0.0;
  BoxBasis basis;
  bool interacting = true;

  Eigen::Index size() const { return eigenvalues.size(); }
  std::vector<Complex> resonances() const;
};

/// Diagonal kinetic energies e^{-2i theta} (hbar kappa_n)^2 / 2m.
VectorXcd kinetic_diagonal(const BoxBasis& basis, const Classicality& cls, double theta);

/// Matrix of V(e^{i theta} x) in the box basis from closed-form Gaussian moments.
///
/// With alpha = eta e^{2i theta}, phi_m phi_n = (1/L)[cos(k_- x + d_-) - cos(k_+ x + d_+)]
/// and the integrals of x^j exp(-alpha x^2 + i k x) over the full line, the matrix
/// is Toeplitz minus Hankel in the basis index: M_mn = (g(m-n) - g(m+n)) / L.
/// Requires 2 theta < pi/2 and a box large enough that the scaled envelope has
/// decayed at the walls (std::invalid_argument otherwise).
MatrixXcd potential_matrix(const PotentialSpec& spec, const BoxBasis& basis, double theta);

/// Single matrix element by adaptive quadrature over the box. Slow; validation only.
Complex potential_element_quadrature(const PotentialSpec& spec, const BoxBasis& basis,
                                     double theta, int m, int n);

ScaledHamiltonian assemble(const std::optional<PotentialSpec>& potential, const BoxBasis& basis,
                           const Classicality& cls, double theta);

struct EigensolveOptions {
  bool compute_vectors = false;  // enables the sampled residual check
};

/// All eigenvalues of the dense complex matrix. Throws NumericalError on non-convergence
/// or when the sampled eigenpair residual exceeds 1e-8 ||H||.
SpectralSet eigensolve(const ScaledHamiltonian& H, EigensolveOptions opts = {});

/// Default angular classification margin: 0.1 * (2 theta).
double default_margin(double theta);

/// Labels eigenvalue E = |E| e^{-i beta} a resonance iff Re E > 0 and
/// beta < 2 theta - margin; everything else (the rotated continuum and what
/// lies beyond it) is background.
SpectralSet classify(SpectralSet set, double theta, double margin);

/// Perturbed run for stabilization_scan.
struct BoxPerturbation {
  double L = 100.0;
  int N = 1500;
  double theta = 0.5;
};

struct ResonanceDrift {
  Complex value;
  double drift = 0.0;  // max over perturbations of the distance to the nearest eigenvalue
  bool stable = true;
};

struct StabilizationReport {
  double tolerance = 0.0;
  std::vector<ResonanceDrift> resonances;  // stable and demoted, ascending by real part
  std::vector<Complex> stable() const;
};

/// Largest distance from `value` to the nearest eigenvalue of each perturbed set.
double max_drift(Complex value, const std::vector<SpectralSet>& perturbed);

/// Re-solves the problem at each perturbation and demotes resonances that move by
/// more than `tolerance`. The free Hamiltonian yields an empty report.
StabilizationReport stabilization_scan(const std::optional<PotentialSpec>& potential,
                                       const Classicality& cls, const BoxBasis& base,
                                       double theta, const std::vector<BoxPerturbation>& deltas,
                                       double tolerance, double margin);

/// Same, reusing an already labeled base spectrum.
StabilizationReport stabilization_scan(const SpectralSet& base_labeled,
                                       const std::optional<PotentialSpec>& potential,
                                       const Classicality& cls,
                                       const std::vector<BoxPerturbation>& deltas,
                                       double tolerance);

}  // namespace cldos
