#pragma once

#include "cldos/density.hpp"
#include "cldos/model.hpp"
#include "cldos/quadrature.hpp"
#include "cldos/types.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <vector>

namespace cldos {

/// Real part: time spent in allowed regions minus the free transit time over the box.
/// Imaginary part: instanton time spent under the barriers, always >= 0.
struct TimeShift {
  double re = 0.0;
  double im = 0.0;
  bool singular = false;  // energy sits on a stationary energy (shifted off it)

  /// Delta T = re - i im: the sign of the imaginary part that makes
  /// Delta T = hbar d Phi / dE with Im Phi = -ln|T|.
  Complex signed_value() const { return {re, -im}; }
};

namespace detail {

// Integral over [lo, hi] of 1/sqrt(gap(x)) - offset(x) where gap > 0 inside and may
// vanish like |x - endpoint| at endpoints flagged singular. Each singular half is mapped
// by x = t +- u^2; panels use a 100-point Gauss-Legendre rule, accepted when one panel
// and its two halves (200 nodes) agree. `magnitude` is the size of the terms the gap is
// the difference of (|E|); the roundoff it implies bounds the reachable accuracy.
template <class Gap, class Offset>
double turning_integral(Gap&& gap, Offset&& offset, double lo, double hi, bool sing_lo,
                        bool sing_hi, double magnitude, double rel_tol = 1e-11) {
  const double gap_noise = 8.0 * std::numeric_limits<double>::epsilon() * std::max(magnitude, 1e-300);
  auto kernel = [&](double x) {
    const double g = std::abs(gap(x));
    return (g > 0.0 ? 1.0 / std::sqrt(g) : 0.0) - offset(x);
  };

  // A panel is accepted when one rule and its two halves agree to rel_tol, to the
  // panel's share of rel_tol times the whole integral, or to the panel integral of the
  // kernel's roundoff (gap_noise / 2 gap^{3/2}), whichever is largest.
  double floor_per_width = 0.0;
  using Fn = std::function<double(double)>;
  std::function<double(const Fn&, const Fn&, double, double, double, int)> panel;
  panel = [&](const Fn& f, const Fn& noise, double a, double b, double whole, int depth) -> double {
    const double mid = 0.5 * (a + b);
    const double left = quad::gauss100(f, a, mid);
    const double right = quad::gauss100(f, mid, b);
    const double refined = left + right;
    const double diff = std::abs(refined - whole);
    if (diff <= rel_tol * std::abs(refined) || diff <= floor_per_width * (b - a)) return refined;
    if (diff <= 4.0 * quad::gauss100(noise, a, b)) return refined;
    if (depth >= 48) {
      std::ostringstream msg;
      msg << "turning-point quadrature did not converge on [" << a << ", " << b
          << "] (estimates " << whole << " vs " << refined << ")";
      throw NumericalError(msg.str());
    }
    return panel(f, noise, a, mid, left, depth + 1) + panel(f, noise, mid, b, right, depth + 1);
  };
  auto integrate = [&](const Fn& f, const Fn& noise, double a, double b) {
    const double whole = quad::gauss100(f, a, b);
    floor_per_width = rel_tol * std::max(std::abs(whole), 1e-300) / (b - a);
    return panel(f, noise, a, b, whole, 0);
  };
  auto noise_of = [&](double g) { return g > 0.0 ? 0.5 * gap_noise / (g * std::sqrt(g)) : 0.0; };

  // Near a turning point t the gap is measured from gap(t), so it vanishes exactly at
  // t even though t itself is only known to roundoff. Below s_c = 1e-8 max(1, |t|) the
  // gap is not resolved in double precision, so that piece uses the linear limit
  // gap ~ slope s with the slope from a secant over an exactly representable offset.
  // A gap that does not vanish at t marks a jump of the potential; its kernel is bounded
  // and is integrated as is.
  auto from_turning = [&](double t, double width, double sign) {
    const double U = std::sqrt(width);
    const double g_t = gap(t);
    if (std::abs(g_t) > 1e3 * gap_noise) {
      const Fn f = [&, t, sign](double u) { return 2.0 * u * kernel(t + sign * u * u); };
      const Fn noise = [&, t, sign](double u) { return 2.0 * u * noise_of(std::abs(gap(t + sign * u * u))); };
      return integrate(f, noise, 0.0, U);
    }
    const double g0 = g_t;
    const double s_c = std::min(1e-8 * std::max(1.0, std::abs(t)), width);
    const double x_c = t + sign * s_c;
    const double s_exact = std::abs(x_c - t);
    const double slope = std::abs(gap(x_c) - g0) / s_exact;
    if (!(slope > 0.0) || !std::isfinite(slope))
      throw NumericalError("turning-point quadrature: gap has no slope at the turning point");
    const double u_c = std::sqrt(s_exact);
    const double inner = 2.0 * u_c / std::sqrt(slope) - offset(t) * s_exact;
    if (u_c >= U) return inner;
    const Fn f = [&, t, g0, sign](double u) {
      const double x = t + sign * u * u;
      const double g = std::abs(gap(x) - g0);
      return 2.0 * u * ((g > 0.0 ? 1.0 / std::sqrt(g) : 0.0) - offset(x));
    };
    const Fn noise = [&, t, g0, sign](double u) { return 2.0 * u * noise_of(std::abs(gap(t + sign * u * u) - g0)); };
    return inner + integrate(f, noise, u_c, U);
  };
  auto from_left = [&](double t, double width) { return from_turning(t, width, 1.0); };
  auto from_right = [&](double t, double width) { return from_turning(t, width, -1.0); };
  const Fn plain = kernel;
  const Fn plain_noise = [&](double x) { return noise_of(std::abs(gap(x))); };

  if (!(hi > lo)) return 0.0;
  if (sing_lo && sing_hi) {
    const double mid = 0.5 * (lo + hi);
    return from_left(lo, mid - lo) + from_right(hi, hi - mid);
  }
  if (sing_lo) return from_left(lo, hi - lo);
  if (sing_hi) return from_right(hi, hi - lo);
  return integrate(plain, plain_noise, lo, hi);
}

}  // namespace detail

/// Both time shifts at energy E for the box [x_L, x_R].
///
/// The free transit time is folded into the allowed-region integrand, so only the
/// effective support of the potential is integrated.
template <RealPotential P>
TimeShift time_shift(const P& pot, const Classicality& cls, double E, double x_L, double x_R,
                     std::span<const double> critical) {
  cls.validate();
  const auto regions = decompose_regions(pot, E, x_L, x_R, critical);
  const double e = regions.effective_energy;
  const double pref = std::sqrt(0.5 * cls.mass);
  const double free_rate = 1.0 / std::sqrt(e);
  const Interval sup = pot.support();

  auto is_turning = [&](double x) { return x != x_L && x != x_R; };

  TimeShift out;
  out.singular = regions.singular;

  double re = 0.0;
  for (const Interval& iv : regions.allowed) {
    const double lo = std::max(iv.lo, sup.lo);
    const double hi = std::min(iv.hi, sup.hi);
    if (!(hi > lo)) continue;
    re += detail::turning_integral([&](double x) { return e - static_cast<double>(pot(x)); },
                                   [&](double) { return free_rate; }, lo, hi,
                                   lo == iv.lo && is_turning(iv.lo),
                                   hi == iv.hi && is_turning(iv.hi), std::abs(e));
  }
  double forbidden_length = 0.0;
  double im = 0.0;
  for (const Interval& iv : regions.forbidden) {
    forbidden_length += iv.length();
    im += detail::turning_integral([&](double x) { return static_cast<double>(pot(x)) - e; },
                                   [](double) { return 0.0; }, iv.lo, iv.hi, is_turning(iv.lo),
                                   is_turning(iv.hi), std::abs(e));
  }
  out.re = pref * (re - free_rate * forbidden_length);
  out.im = pref * im;
  return out;
}

template <RealPotential P>
TimeShift time_shift(const P& pot, const Classicality& cls, double E, double x_L, double x_R) {
  const auto critical = pot.critical_energies();
  return time_shift(pot, cls, E, x_L, x_R, std::span<const double>(critical));
}

/// Allowed-region traversal time minus the free transit time sqrt(m / 2E) (x_R - x_L).
template <RealPotential P>
double re_time_shift(const P& pot, const Classicality& cls, double E, double x_L, double x_R) {
  return time_shift(pot, cls, E, x_L, x_R).re;
}

/// Integral of sqrt(m / 2(V - E)) over the forbidden regions.
template <RealPotential P>
double im_time_shift(const P& pot, const Classicality& cls, double E, double x_L, double x_R) {
  return time_shift(pot, cls, E, x_L, x_R).im;
}

struct TimeShiftCurve {
  std::vector<double> grid;
  std::vector<double> re_values;
  std::vector<double> im_values;  // barrier (instanton) times, >= 0
  std::vector<bool> singular_flags;

  /// Delta T(E) = re - i im at every grid point.
  std::vector<Complex> signed_values() const;
};

inline constexpr double kSingularHalfwidthFactor = 10.0;

/// Half-width of the window flagged around stationary energies: factor * nominal spacing.
double singular_halfwidth(std::span<const double> grid, double factor = kSingularHalfwidthFactor);

template <RealPotential P>
TimeShiftCurve time_shift_curve(const P& pot, const Classicality& cls,
                                std::span<const double> grid, double x_L, double x_R,
                                double halfwidth_factor = kSingularHalfwidthFactor) {
  const auto critical = pot.critical_energies();
  const double hw = singular_halfwidth(grid, halfwidth_factor);
  TimeShiftCurve out;
  out.grid.assign(grid.begin(), grid.end());
  for (double E : grid) {
    const TimeShift t = time_shift(pot, cls, E, x_L, x_R, std::span<const double>(critical));
    bool flagged = t.singular;
    for (double e0 : critical) flagged = flagged || std::abs(E - e0) < hw;
    out.re_values.push_back(t.re);
    out.im_values.push_back(t.im);
    out.singular_flags.push_back(flagged);
  }
  return out;
}

inline constexpr const char* kTimeShiftSignConvention =
    "Delta T = ReT - i ImT with ImT the forbidden-region integral (>= 0)";

/// Semiclassical prediction Delta rho = Delta T / (pi hbar).
struct SemiclassicalDensity {
  std::vector<double> grid;
  std::vector<Complex> values;
  std::vector<bool> singular_flags;
  std::string sign_convention = kTimeShiftSignConvention;
};

SemiclassicalDensity scale_to_density(const TimeShiftCurve& curve, const Classicality& cls);

template <RealPotential P>
SemiclassicalDensity semiclassical_density(const P& pot, const Classicality& cls,
                                           std::span<const double> grid, double x_L, double x_R) {
  return scale_to_density(time_shift_curve(pot, cls, grid, x_L, x_R), cls);
}

enum class TimePart { real, imaginary };
enum class SingularityModel { log, step, power_quarter };

std::string to_string(SingularityModel m);

/// Model implied by the stationary point: for the real part V itself applies, for the
/// imaginary part the inverted potential -V (maxima and minima swap roles).
SingularityModel model_for(const StationaryPoint& sp, TimePart part);

/// Samples used lie at inner <= |E - E0| <= outer.
struct FitWindow {
  double inner = 0.0;
  double outer = 0.1;
};

struct SingularityFit {
  double E0 = 0.0;
  SingularityModel model = SingularityModel::log;
  double amplitude = 0.0;  // log: A; step: mean(above) - mean(below); power: prefactor
  double offset = 0.0;     // log: B; step: mean(below)
  double exponent = 0.0;   // power_quarter only
  double gap_sigma = 0.0;  // step only: |gap| / pooled within-side deviation
  double r2 = 0.0;
  int side = 0;            // power_quarter: -1 below E0, +1 above
  int samples_below = 0;
  int samples_above = 0;
};

inline constexpr int kMinSamplesPerSide = 20;

/// Least-squares fit of the singularity form at sp.E0.
///   log:           y = A ln|E - E0| + B over both sides
///   step:          side means and their gap in units of the within-side deviation
///   power_quarter: slope of ln|y| against ln|E - E0| on the divergent side
/// Throws std::invalid_argument for fewer than kMinSamplesPerSide usable samples on a
/// required side, NumericalError for a degenerate fit matrix.
SingularityFit fit_singularity(std::span<const double> energies, std::span<const double> values,
                               std::span<const bool> excluded, const StationaryPoint& sp,
                               SingularityModel model, FitWindow window);

SingularityFit fit_singularity(const TimeShiftCurve& curve, TimePart part,
                               const StationaryPoint& sp, FitWindow window);

SingularityFit fit_singularity(const DensityCurve& curve, TimePart part,
                               const StationaryPoint& sp, FitWindow window);

}  // namespace cldos
