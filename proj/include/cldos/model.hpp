#pragma once

#include "cldos/types.hpp"

#include <cmath>
#include <concepts>
#include <span>
#include <vector>

namespace cldos {

/// Gaussian-modulated quadratic V(x) = (a + b x + c x^2) exp(-eta x^2), dimensionless.
///
/// The call operator is templated on the scalar so the same object evaluates
/// V on the real line and on the complex-scaled ray V(e^{i theta} x).
struct PotentialSpec {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double eta = 0.1;

  template <class Scalar>
  Scalar operator()(Scalar z) const {
    using std::exp;
    return (Scalar(a) + Scalar(b) * z + Scalar(c) * z * z) * exp(Scalar(-eta) * z * z);
  }

  /// n-th derivative on the real axis, n >= 0, evaluated analytically.
  double derivative(int n, double x) const;

  /// Where exp(-eta x^2) >= floor. Outside this interval V is treated as zero.
  Interval support(double floor = 1e-16) const;

  /// Smooth potential: no discontinuities.
  std::vector<double> breakpoints() const { return {}; }

  /// Energies V(x0) of the stationary points inside the support.
  std::vector<double> critical_energies() const;

  bool is_free() const { return a == 0.0 && b == 0.0 && c == 0.0; }
  void validate() const;
  bool operator==(const PotentialSpec&) const = default;
};

/// Rectangular barrier of the given height on [center - width/2, center + width/2].
/// Reference potential for closed-form checks; not part of the Gaussian family.
struct RectangularBarrier {
  double height = 1.0;
  double width = 1.0;
  double center = 0.0;

  double operator()(double x) const {
    return std::abs(x - center) < 0.5 * width ? height : 0.0;
  }
  Interval support() const { return {center - 0.5 * width, center + 0.5 * width}; }
  std::vector<double> breakpoints() const { return {support().lo, support().hi}; }
  std::vector<double> critical_energies() const { return {}; }
};

/// A real potential with finite effective support, usable by the semiclassical
/// integrals and the scattering oracle.
template <class P>
concept RealPotential = requires(const P& p, double x) {
  { p(x) } -> std::convertible_to<double>;
  { p.support() } -> std::convertible_to<Interval>;
  { p.breakpoints() } -> std::convertible_to<std::vector<double>>;
  { p.critical_energies() } -> std::convertible_to<std::vector<double>>;
};

template <class Scalar>
Scalar eval_potential(const PotentialSpec& spec, Scalar z) {
  return spec(z);
}

enum class ExtremumKind { maximum, minimum };

struct StationaryPoint {
  double x0 = 0.0;
  double E0 = 0.0;
  int order = 2;  // index of the first non-vanishing derivative
  ExtremumKind kind = ExtremumKind::maximum;
};

/// All extrema of V inside `search`, sorted by position. Stationary inflection
/// points (odd order) are not extrema and are skipped.
/// Throws NumericalError when a bracketed root cannot be refined.
std::vector<StationaryPoint> stationary_points(const PotentialSpec& spec, Interval search);
std::vector<StationaryPoint> stationary_points(const PotentialSpec& spec);

struct RegionDecomposition {
  double energy = 0.0;            // requested energy
  double effective_energy = 0.0;  // energy actually used (shifted off a tangency)
  bool singular = false;          // energy within kTangencyTolerance of a stationary energy
  Interval box;
  std::vector<Interval> allowed;    // E >= V(x)
  std::vector<Interval> forbidden;  // E <  V(x)
};

inline constexpr double kTangencyTolerance = 1e-9;
inline constexpr int kTurningPointGrid = 10000;

namespace detail {

// Bisection on a sign change of f between lo and hi down to machine resolution.
template <class F>
double bisect(F&& f, double lo, double hi) {
  const bool lo_positive = f(lo) > 0.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if ((f(mid) > 0.0) == lo_positive) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

/// Splits [x_L, x_R] into classically allowed and forbidden intervals at energy E.
///
/// Turning points are bracketed on a uniform grid over the effective support and
/// refined by bisection. If E lies within kTangencyTolerance of one of
/// `critical`, it is shifted away by that tolerance and the result is flagged.
template <RealPotential P>
RegionDecomposition decompose_regions(const P& pot, double E, double x_L, double x_R,
                                      std::span<const double> critical) {
  if (!(x_L < x_R)) throw std::invalid_argument("decompose_regions: requires x_L < x_R");
  if (!(E > 0.0)) throw std::invalid_argument("decompose_regions: requires E > 0");

  RegionDecomposition out;
  out.energy = E;
  out.effective_energy = E;
  out.box = {x_L, x_R};
  for (double e0 : critical) {
    if (std::abs(E - e0) < kTangencyTolerance) {
      out.singular = true;
      out.effective_energy = E >= e0 ? e0 + kTangencyTolerance : e0 - kTangencyTolerance;
      break;
    }
  }
  const double e = out.effective_energy;
  auto excess = [&](double x) { return static_cast<double>(pot(x)) - e; };

  const Interval sup = pot.support();
  const double g_lo = std::max(x_L, sup.lo);
  const double g_hi = std::min(x_R, sup.hi);

  // Boundaries alternate allowed/forbidden starting from x_L.
  std::vector<double> cuts{x_L};
  bool first_forbidden = excess(x_L) > 0.0;
  if (g_lo < g_hi) {
    const int n = kTurningPointGrid;
    const double h = (g_hi - g_lo) / (n - 1);
    double prev_x = x_L;
    bool prev_forbidden = first_forbidden;
    for (int i = 0; i < n; ++i) {
      const double x = i == n - 1 ? g_hi : g_lo + i * h;
      const bool fb = excess(x) > 0.0;
      if (fb != prev_forbidden) {
        cuts.push_back(detail::bisect(excess, prev_x, x));
        prev_forbidden = fb;
      }
      prev_x = x;
    }
    if ((excess(x_R) > 0.0) != prev_forbidden) {
      cuts.push_back(detail::bisect(excess, prev_x, x_R));
    }
  }
  cuts.push_back(x_R);

  bool forbidden = first_forbidden;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const Interval iv{cuts[i], cuts[i + 1]};
    if (iv.length() > 0.0) (forbidden ? out.forbidden : out.allowed).push_back(iv);
    forbidden = !forbidden;
  }
  return out;
}

template <RealPotential P>
RegionDecomposition decompose_regions(const P& pot, double E, double x_L, double x_R) {
  const auto critical = pot.critical_energies();
  return decompose_regions(pot, E, x_L, x_R, std::span<const double>(critical));
}

}  // namespace cldos
