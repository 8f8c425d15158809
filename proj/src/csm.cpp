#include "cldos/csm.hpp"

#include "cldos/quadrature.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

namespace cldos {

void BoxBasis::validate() const {
  if (!(L > 0.0)) throw std::invalid_argument("box: L must be > 0");
  if (N < 1) throw std::invalid_argument("box: N must be >= 1");
}

std::vector<Complex> SpectralSet::resonances() const {
  std::vector<Complex> out;
  for (Eigen::Index k = 0; k < eigenvalues.size() && k < Eigen::Index(labels.size()); ++k)
    if (labels[k] == SpectralLabel::resonance) out.push_back(eigenvalues(k));
  return out;
}

VectorXcd kinetic_diagonal(const BoxBasis& basis, const Classicality& cls, double theta) {
  basis.validate();
  cls.validate();
  const Complex phase = std::polar(1.0, -2.0 * theta);
  VectorXcd d(basis.N);
  for (int n = 1; n <= basis.N; ++n) {
    const double p = cls.hbar * basis.kappa(n);
    d(n - 1) = phase * (p * p / (2.0 * cls.mass));
  }
  return d;
}

namespace {

void check_scaling_angle(double theta) {
  if (!(std::abs(2.0 * theta) < 0.5 * kPi)) {
    std::ostringstream msg;
    msg << "potential_matrix: scaled Gaussian does not decay for theta=" << theta
        << " (need |2 theta| < pi/2)";
    throw std::invalid_argument(msg.str());
  }
}

}  // namespace

MatrixXcd potential_matrix(const PotentialSpec& spec, const BoxBasis& basis, double theta) {
  spec.validate();
  basis.validate();
  check_scaling_angle(theta);
  const int N = basis.N;
  if (spec.is_free()) return MatrixXcd::Zero(N, N);

  const Complex alpha = spec.eta * std::polar(1.0, 2.0 * theta);
  const Complex b_s = spec.b * std::polar(1.0, theta);
  const Complex c_s = spec.c * std::polar(1.0, 2.0 * theta);

  const double half = 0.5 * basis.L;
  const double coeff = std::abs(spec.a) + std::abs(spec.b) + std::abs(spec.c);
  const double wall = std::exp(-alpha.real() * half * half) *
                      (std::abs(spec.a) + std::abs(spec.b) * half + std::abs(spec.c) * half * half);
  if (wall > 1e-12 * coeff) {
    std::ostringstream msg;
    msg << "potential_matrix: box L=" << basis.L
        << " too small, scaled potential at the wall is " << wall;
    throw std::invalid_argument(msg.str());
  }

  // g(s) = integral of V(e^{i theta} x) cos(k_s x + s pi / 2), k_s = s pi / L.
  const Complex root = std::sqrt(kPi / alpha);
  VectorXcd g(2 * N + 1);
  for (int s = 0; s <= 2 * N; ++s) {
    const double k = s * kPi / basis.L;
    const Complex f0 = root * std::exp(-k * k / (4.0 * alpha));
    if (s % 2 == 0) {
      const double cos_d = (s / 2) % 2 == 0 ? 1.0 : -1.0;
      const Complex f2 = (1.0 / (2.0 * alpha)) * (1.0 - k * k / (2.0 * alpha)) * f0;
      g(s) = cos_d * (spec.a * f0 + c_s * f2);
    } else {
      const double sin_d = ((s - 1) / 2) % 2 == 0 ? 1.0 : -1.0;
      g(s) = -sin_d * b_s * (k / (2.0 * alpha)) * f0;
    }
  }

  MatrixXcd M(N, N);
  const double inv_L = 1.0 / basis.L;
  for (int n = 1; n <= N; ++n)
    for (int m = 1; m <= N; ++m) M(m - 1, n - 1) = inv_L * (g(std::abs(m - n)) - g(m + n));
  return M;
}

Complex potential_element_quadrature(const PotentialSpec& spec, const BoxBasis& basis,
                                     double theta, int m, int n) {
  const Complex scale = std::polar(1.0, theta);
  const double half = 0.5 * basis.L;
  const double norm = 2.0 / basis.L;
  auto integrand = [&](double x) {
    return norm * std::sin(basis.kappa(m) * (x + half)) * std::sin(basis.kappa(n) * (x + half)) *
           spec(scale * x);
  };
  // Split at the support edge so the adaptive rule sees the interaction region.
  const Interval sup = spec.support(1e-20);
  const double lo = std::max(-half, sup.lo);
  const double hi = std::min(half, sup.hi);
  Complex sum = quad::adaptive_absolute(integrand, lo, hi, 1e-13);
  if (lo > -half) sum += quad::adaptive_absolute(integrand, -half, lo, 1e-13);
  if (hi < half) sum += quad::adaptive_absolute(integrand, hi, half, 1e-13);
  return sum;
}

ScaledHamiltonian assemble(const std::optional<PotentialSpec>& potential, const BoxBasis& basis,
                           const Classicality& cls, double theta) {
  ScaledHamiltonian H;
  H.theta = theta;
  H.basis = basis;
  H.classicality = cls;
  H.potential = potential;
  if (potential) {
    H.matrix = potential_matrix(*potential, basis, theta);
  } else {
    check_scaling_angle(theta);
    H.matrix = MatrixXcd::Zero(basis.N, basis.N);
  }
  H.matrix.diagonal() += kinetic_diagonal(basis, cls, theta);
  return H;
}

double default_margin(double theta) { return 0.1 * 2.0 * theta; }

SpectralSet classify(SpectralSet set, double theta, double margin) {
  set.labels.assign(set.eigenvalues.size(), SpectralLabel::background);
  for (Eigen::Index k = 0; k < set.eigenvalues.size(); ++k) {
    const Complex e = set.eigenvalues(k);
    const double beta = -std::arg(e);
    if (e.real() > 0.0 && beta < 2.0 * theta - margin) set.labels[k] = SpectralLabel::resonance;
  }
  return set;
}

std::vector<Complex> StabilizationReport::stable() const {
  std::vector<Complex> out;
  for (const auto& r : resonances)
    if (r.stable) out.push_back(r.value);
  return out;
}

double max_drift(Complex value, const std::vector<SpectralSet>& perturbed) {
  double worst = 0.0;
  for (const auto& set : perturbed) {
    double nearest = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < set.eigenvalues.size(); ++j)
      nearest = std::min(nearest, std::abs(set.eigenvalues(j) - value));
    worst = std::max(worst, nearest);
  }
  return worst;
}

StabilizationReport stabilization_scan(const SpectralSet& base_labeled,
                                       const std::optional<PotentialSpec>& potential,
                                       const Classicality& cls,
                                       const std::vector<BoxPerturbation>& deltas,
                                       double tolerance) {
  StabilizationReport report;
  report.tolerance = tolerance;
  const auto candidates = base_labeled.resonances();
  if (candidates.empty()) return report;

  std::vector<SpectralSet> perturbed;
  perturbed.reserve(deltas.size());
  for (const auto& d : deltas)
    perturbed.push_back(eigensolve(assemble(potential, BoxBasis{d.L, d.N}, cls, d.theta)));

  for (const Complex& e : candidates) {
    const double drift = max_drift(e, perturbed);
    report.resonances.push_back({e, drift, drift <= tolerance});
  }
  return report;
}

StabilizationReport stabilization_scan(const std::optional<PotentialSpec>& potential,
                                       const Classicality& cls, const BoxBasis& base,
                                       double theta, const std::vector<BoxPerturbation>& deltas,
                                       double tolerance, double margin) {
  auto base_set = classify(eigensolve(assemble(potential, base, cls, theta)), theta, margin);
  return stabilization_scan(base_set, potential, cls, deltas, tolerance);
}

}  // namespace cldos
