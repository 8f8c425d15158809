#pragma once

#include "cldos/model.hpp"
#include "cldos/types.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <sstream>
#include <vector>

namespace cldos {

/// Slicing controls for the direct integration.
struct OracleResolution {
  double slices_per_wavelength = 40.0;  // per shortest local de Broglie wavelength
  int min_slices = 10000;
  int refine_depth = 30;  // energy bisections allowed where the phase moves too fast
  bool operator==(const OracleResolution&) const = default;
};

/// Transmission and reflection at one energy for a wave incident from the left.
/// `log_T` is ln T (complex), kept separately because |T| underflows in deep tunneling.
struct ScatterPoint {
  double E = 0.0;
  Complex T;
  Complex R;
  Complex log_T;
  Complex Phi;  // T = exp(i Phi); Phi = phase - i ln|T|, continued along a grid
};

namespace detail {

// One fourth-order Magnus step of (psi, psi') over [x, x + step] for psi'' = q psi.
// For real q the exponential of the traceless 2x2 generator is real: trigonometric
// when the generator squares to a negative multiple of the identity, hyperbolic otherwise.
struct MagnusStep {
  double m11, m12, m21, m22;
};

inline MagnusStep magnus4(double q1, double q2, double step) {
  const double d = std::sqrt(3.0) / 12.0 * step * step * (q1 - q2);
  const double o12 = step;
  const double o21 = 0.5 * step * (q1 + q2);
  const double s2 = d * d + o12 * o21;
  double ch, sh_over_s;
  if (std::abs(s2) < 1e-8) {
    ch = 1.0 + s2 / 2.0 + s2 * s2 / 24.0;
    sh_over_s = 1.0 + s2 / 6.0 + s2 * s2 / 120.0;
  } else if (s2 > 0.0) {
    const double s = std::sqrt(s2);
    ch = std::cosh(s);
    sh_over_s = std::sinh(s) / s;
  } else {
    const double w = std::sqrt(-s2);
    ch = std::cos(w);
    sh_over_s = std::sin(w) / w;
  }
  return {ch + sh_over_s * d, sh_over_s * o12, sh_over_s * o21, ch - sh_over_s * d};
}

}  // namespace detail

/// Integrates the stationary Schroedinger equation from the right (pure outgoing
/// wave T e^{ikx}) to the left and matches to e^{ikx} + R e^{-ikx}.
///
/// Outside the effective support V is taken as exactly zero, so integration covers
/// [max(x_L, support.lo), min(x_R, support.hi)]. Slices are uniform between the
/// potential's breakpoints; the state is renormalized every slice and the log of
/// the discarded scale is accumulated.
template <RealPotential P>
ScatterPoint solve_scatter(const P& pot, const Classicality& cls, double E, double x_L,
                           double x_R, OracleResolution res = {}) {
  cls.validate();
  if (!(E > 0.0)) throw std::invalid_argument("solve_scatter: requires E > 0");
  if (!(x_L < x_R)) throw std::invalid_argument("solve_scatter: requires x_L < x_R");
  if (!(res.slices_per_wavelength > 0.0) || res.min_slices < 1)
    throw std::invalid_argument("solve_scatter: invalid resolution");

  ScatterPoint out;
  out.E = E;
  const double k = std::sqrt(2.0 * cls.mass * E) / cls.hbar;
  const Interval sup = pot.support();
  const double x_start = std::min(x_R, sup.hi);
  const double x_end = std::max(x_L, sup.lo);

  // Coarse survey for the shortest local wavelength and for an identically free region.
  double max_gap = E;
  bool all_zero = true;
  if (x_end < x_start) {
    const int survey = 4000;
    for (int i = 0; i <= survey; ++i) {
      const double v = static_cast<double>(pot(x_end + (x_start - x_end) * i / survey));
      all_zero = all_zero && v == 0.0;
      max_gap = std::max(max_gap, std::abs(E - v));
    }
  }
  if (all_zero) {
    out.T = {1.0, 0.0};
    out.R = {0.0, 0.0};
    out.log_T = {0.0, 0.0};
    out.Phi = {0.0, 0.0};
    return out;
  }

  const double length = x_start - x_end;
  const double lambda_min = 2.0 * kPi * cls.hbar / std::sqrt(2.0 * cls.mass * max_gap);
  const double wanted = std::max<double>(res.min_slices, res.slices_per_wavelength * length / lambda_min);

  std::vector<double> cuts{x_end};
  for (double b : pot.breakpoints())
    if (b > x_end && b < x_start) cuts.push_back(b);
  cuts.push_back(x_start);
  std::sort(cuts.begin(), cuts.end());

  const double q_scale = 2.0 * cls.mass / (cls.hbar * cls.hbar);
  const double c1 = 0.5 - std::sqrt(3.0) / 6.0;
  const double c2 = 0.5 + std::sqrt(3.0) / 6.0;

  Complex psi = std::polar(1.0, k * x_start);
  Complex dpsi = Complex(0.0, k) * psi;
  double log_scale = 0.0;

  for (std::size_t seg = cuts.size() - 1; seg > 0; --seg) {
    const double a = cuts[seg];
    const double b = cuts[seg - 1];
    const int n = std::max(1, int(std::ceil(wanted * (a - b) / length)));
    const double step = (b - a) / n;  // negative: leftward
    for (int i = 0; i < n; ++i) {
      const double x = a + i * step;
      const double q1 = q_scale * (static_cast<double>(pot(x + c1 * step)) - E);
      const double q2 = q_scale * (static_cast<double>(pot(x + c2 * step)) - E);
      const auto M = detail::magnus4(q1, q2, step);
      const Complex p = M.m11 * psi + M.m12 * dpsi;
      const Complex dp = M.m21 * psi + M.m22 * dpsi;
      const double nrm = std::sqrt(std::norm(p) + std::norm(dp) / (k * k));
      psi = p / nrm;
      dpsi = dp / nrm;
      log_scale += std::log(nrm);
    }
  }

  const Complex ik{0.0, k};
  const Complex A = 0.5 * (psi + dpsi / ik) * std::polar(1.0, -k * x_end);
  const Complex B = 0.5 * (psi - dpsi / ik) * std::polar(1.0, k * x_end);
  if (!std::isfinite(std::abs(A)) || std::abs(A) == 0.0 || !std::isfinite(log_scale)) {
    std::ostringstream msg;
    msg << "solve_scatter: lost dynamic range at E=" << E << " (log scale " << log_scale << ")";
    throw NumericalError(msg.str());
  }
  out.log_T = -(std::log(A) + log_scale);
  out.T = std::exp(out.log_T);
  out.R = B / A;
  out.Phi = Complex(0.0, -1.0) * out.log_T;
  return out;
}

/// Largest phase change accepted between neighbouring grid energies.
inline constexpr double kMaxPhaseStep = 0.5 * kPi;

/// A phase jump confined to an energy interval narrower than this (relative to
/// max(1, E)) is treated as a sharp feature rather than an under-resolved grid.
inline constexpr double kSharpWidth = 1e-9;

/// Re Phi difference between two points reduced to (-pi, pi].
inline double wrapped_phase_step(const ScatterPoint& a, const ScatterPoint& b) {
  const double step = b.Phi.real() - a.Phi.real();
  return step - 2.0 * kPi * std::round(step / (2.0 * kPi));
}

/// Oracle scattering data with the density (1/pi) dPhi/dE. The grid holds the
/// requested energies plus any inserted by refinement.
struct OracleCurve {
  std::vector<ScatterPoint> points;
  std::vector<Complex> density;
  // Phase jumps narrower than refinement can reach (resonances far below the energy
  // resolution), at the midpoint of their interval. Each carries its step in Re Phi,
  // which is kept in the unwrapped phase but removed before differentiating.
  std::vector<double> sharp;
  std::vector<double> sharp_steps;
  std::vector<double> grid() const;
};

/// Continues Re Phi across the grid (2 pi unwrapping) and differentiates by central
/// differences, one-sided at the ends. Intervals listed in `sharp_after` (index of the
/// left point) may jump; any other step above kMaxPhaseStep throws NumericalError,
/// which means the grid does not resolve the phase.
OracleCurve finish_oracle_curve(std::vector<ScatterPoint> points,
                                std::span<const std::size_t> sharp_after = {});

/// Solves on `grid`, bisecting any interval whose phase step exceeds kMaxPhaseStep up
/// to res.refine_depth times (narrow resonances), then differentiates. Intervals still
/// unresolved at that depth become sharp features of the curve if they are narrower
/// than kSharpWidth; otherwise NumericalError asks for a finer grid.
template <RealPotential P>
OracleCurve oracle_density(const P& pot, const Classicality& cls, std::span<const double> grid,
                           double x_L, double x_R, OracleResolution res = {}) {
  auto solve = [&](double E) { return solve_scatter(pot, cls, E, x_L, x_R, res); };
  std::vector<ScatterPoint> pts;
  std::vector<std::size_t> sharp_after;
  pts.reserve(grid.size());
  // In-order bisection: `lo` is always the last point pushed.
  std::function<void(const ScatterPoint&, const ScatterPoint&, int)> refine;
  refine = [&](const ScatterPoint& lo, const ScatterPoint& hi, int depth) {
    if (std::abs(wrapped_phase_step(lo, hi)) <= kMaxPhaseStep) return;
    const double mid_E = 0.5 * (lo.E + hi.E);
    if (depth == 0 || mid_E <= lo.E || mid_E >= hi.E) {
      if (hi.E - lo.E <= kSharpWidth * std::max(1.0, hi.E)) sharp_after.push_back(pts.size() - 1);
      return;
    }
    const ScatterPoint mid = solve(mid_E);
    refine(lo, mid, depth - 1);
    pts.push_back(mid);
    refine(mid, hi, depth - 1);
  };
  for (double E : grid) {
    ScatterPoint p = solve(E);
    if (!pts.empty()) {
      const ScatterPoint prev = pts.back();
      refine(prev, p, res.refine_depth);
    }
    pts.push_back(std::move(p));
  }
  return finish_oracle_curve(std::move(pts), sharp_after);
}

struct ExtractedResonance {
  double E = 0.0;
  double Gamma = 0.0;
  double area = 0.0;  // Lorentzian weight; 1 for an isolated Breit-Wigner peak
  double r2 = 0.0;
};

struct ExtractionOptions {
  double min_prominence = 0.0;  // absolute; 0 selects 1e-3 of the curve's range
  double window_widths = 3.0;   // half-window in units of the estimated width
};

/// Peaks of Re(density) fitted by Lorentzians on a linear background; peaks whose
/// windows overlap are fitted jointly. Returns an empty list when no peak is found.
std::vector<ExtractedResonance> resonance_extract(std::span<const double> energies,
                                                  std::span<const double> values,
                                                  ExtractionOptions opts = {});
std::vector<ExtractedResonance> resonance_extract(const OracleCurve& curve,
                                                  ExtractionOptions opts = {});

}  // namespace cldos
