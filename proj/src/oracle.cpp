#include "cldos/oracle.hpp"

#include <unsupported/Eigen/LevenbergMarquardt>

#include <algorithm>
#include <numeric>

namespace cldos {

std::vector<double> OracleCurve::grid() const {
  std::vector<double> g;
  g.reserve(points.size());
  for (const auto& p : points) g.push_back(p.E);
  return g;
}

OracleCurve finish_oracle_curve(std::vector<ScatterPoint> points, std::span<const std::size_t> sharp_after) {
  OracleCurve out;
  const std::size_t n = points.size();
  // Phase with the sharp jumps taken out, used only for the derivative.
  std::vector<Complex> smooth(n);
  double removed = 0.0;
  if (n > 0) smooth[0] = points[0].Phi;
  for (std::size_t i = 1; i < n; ++i) {
    const double step = wrapped_phase_step(points[i - 1], points[i]);
    const bool sharp = std::find(sharp_after.begin(), sharp_after.end(), i - 1) != sharp_after.end();
    if (std::abs(step) > kMaxPhaseStep) {
      if (!sharp) {
        std::ostringstream msg;
        msg << "oracle_density: phase step " << step << " between E=" << points[i - 1].E
            << " and E=" << points[i].E << " is not resolved; refine the grid";
        throw NumericalError(msg.str());
      }
      out.sharp.push_back(0.5 * (points[i - 1].E + points[i].E));
      out.sharp_steps.push_back(step);
      removed += step;
    }
    points[i].Phi = {points[i - 1].Phi.real() + step, points[i].Phi.imag()};
    smooth[i] = points[i].Phi - removed;
  }
  out.density.resize(n);
  if (n >= 2) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t lo = i == 0 ? 0 : i - 1;
      const std::size_t hi = i + 1 == n ? n - 1 : i + 1;
      out.density[i] = (smooth[hi] - smooth[lo]) / (kPi * (points[hi].E - points[lo].E));
    }
  }
  out.points = std::move(points);
  return out;
}

namespace {

// Sum of Lorentzians (area_j / pi) (G_j / 2) / ((E - E_j)^2 + G_j^2 / 4) plus c0 + c1 (E - center).
// Parameters: [E_1, G_1, A_1, ..., E_n, G_n, A_n, c0, c1].
struct LorentzianSum : Eigen::DenseFunctor<double> {
  const std::vector<double>& x;
  const std::vector<double>& y;
  int peaks;
  double center;

  LorentzianSum(const std::vector<double>& x_, const std::vector<double>& y_, int peaks_, double center_)
      : Eigen::DenseFunctor<double>(3 * peaks_ + 2, int(x_.size())), x(x_), y(y_), peaks(peaks_),
        center(center_) {}

  int operator()(const VectorXd& p, VectorXd& f) const {
    for (std::size_t i = 0; i < x.size(); ++i) {
      double v = p(3 * peaks) + p(3 * peaks + 1) * (x[i] - center);
      for (int j = 0; j < peaks; ++j) {
        const double d = x[i] - p(3 * j);
        const double g = p(3 * j + 1);
        v += p(3 * j + 2) / kPi * 0.5 * g / (d * d + 0.25 * g * g);
      }
      f(Eigen::Index(i)) = v - y[i];
    }
    return 0;
  }

  int df(const VectorXd& p, Eigen::MatrixXd& J) const {
    for (std::size_t i = 0; i < x.size(); ++i) {
      const auto r = Eigen::Index(i);
      for (int j = 0; j < peaks; ++j) {
        const double d = x[i] - p(3 * j);
        const double g = p(3 * j + 1);
        const double a = p(3 * j + 2);
        const double den = d * d + 0.25 * g * g;
        J(r, 3 * j) = a / kPi * g * d / (den * den);
        J(r, 3 * j + 1) = a / kPi * 0.5 * (den - 0.5 * g * g) / (den * den);
        J(r, 3 * j + 2) = 0.5 * g / (kPi * den);
      }
      J(r, 3 * peaks) = 1.0;
      J(r, 3 * peaks + 1) = x[i] - center;
    }
    return 0;
  }
};

struct PeakGuess {
  std::size_t index;
  double E;
  double Gamma;
  double lo;  // fit window
  double hi;
};

}  // namespace

std::vector<ExtractedResonance> resonance_extract(std::span<const double> energies,
                                                  std::span<const double> values,
                                                  ExtractionOptions opts) {
  std::vector<ExtractedResonance> out;
  const std::size_t n = energies.size();
  if (n < 5 || values.size() != n) return out;

  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  const double prominence_floor = opts.min_prominence > 0.0 ? opts.min_prominence : 1e-3 * (*mx - *mn);

  std::vector<PeakGuess> guesses;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(values[i] > values[i - 1] && values[i] >= values[i + 1])) continue;
    std::size_t l = i;
    while (l > 0 && values[l - 1] <= values[l]) --l;
    std::size_t r = i;
    while (r + 1 < n && values[r + 1] <= values[r]) ++r;
    const double base = std::max(values[l], values[r]);
    if (values[i] - base < prominence_floor) continue;

    // Half-maximum crossings above the higher valley give the initial width.
    const double half = 0.5 * (values[i] + base);
    auto crossing = [&](std::size_t from, int dir, std::size_t stop) {
      std::size_t j = from;
      while (j != stop && values[j] > half) j = std::size_t(int(j) + dir);
      if (values[j] > half) return energies[j];
      const std::size_t k = std::size_t(int(j) - dir);
      const double t = (values[k] - half) / (values[k] - values[j]);
      return energies[k] + t * (energies[j] - energies[k]);
    };
    const double e_lo = crossing(i, -1, l);
    const double e_hi = crossing(i, +1, r);
    const double gamma = std::max(e_hi - e_lo, energies[i + 1] - energies[i - 1]);
    const double w = opts.window_widths * gamma;
    guesses.push_back({i, energies[i], gamma, std::max(energies[l], energies[i] - w),
                       std::min(energies[r], energies[i] + w)});
  }

  // Join peaks whose windows overlap into one fit group.
  std::size_t g = 0;
  while (g < guesses.size()) {
    std::size_t h = g + 1;
    double lo = guesses[g].lo;
    double hi = guesses[g].hi;
    while (h < guesses.size() && guesses[h].lo <= hi) {
      hi = std::max(hi, guesses[h].hi);
      lo = std::min(lo, guesses[h].lo);
      ++h;
    }
    const int peaks = int(h - g);

    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < n; ++i) {
      if (energies[i] >= lo && energies[i] <= hi) {
        xs.push_back(energies[i]);
        ys.push_back(values[i]);
      }
    }
    if (int(xs.size()) < 3 * peaks + 3) {
      g = h;
      continue;
    }
    const double center = 0.5 * (lo + hi);
    VectorXd p(3 * peaks + 2);
    const double edge = 0.5 * (ys.front() + ys.back());
    for (int j = 0; j < peaks; ++j) {
      const auto& pg = guesses[g + std::size_t(j)];
      p(3 * j) = pg.E;
      p(3 * j + 1) = pg.Gamma;
      p(3 * j + 2) = (values[pg.index] - edge) * kPi * pg.Gamma / 2.0;
    }
    p(3 * peaks) = edge;
    p(3 * peaks + 1) = (ys.back() - ys.front()) / (xs.back() - xs.front());

    LorentzianSum functor(xs, ys, peaks, center);
    Eigen::LevenbergMarquardt<LorentzianSum> lm(functor);
    lm.setXtol(1e-14);
    lm.setFtol(1e-14);
    lm.setMaxfev(4000);
    lm.minimize(p);

    VectorXd resid(Eigen::Index(xs.size()));
    functor(p, resid);
    const double m = std::accumulate(ys.begin(), ys.end(), 0.0) / double(ys.size());
    double ss_tot = 0.0;
    for (double v : ys) ss_tot += (v - m) * (v - m);
    const double r2 = ss_tot > 0.0 ? 1.0 - resid.squaredNorm() / ss_tot : 1.0;
    for (int j = 0; j < peaks; ++j) {
      const double gamma = std::abs(p(3 * j + 1));
      if (p(3 * j) < lo || p(3 * j) > hi || !std::isfinite(gamma)) continue;
      out.push_back({p(3 * j), gamma, p(3 * j + 2), r2});
    }
    g = h;
  }
  std::sort(out.begin(), out.end(), [](auto& a, auto& b) { return a.E < b.E; });
  return out;
}

std::vector<ExtractedResonance> resonance_extract(const OracleCurve& curve, ExtractionOptions opts) {
  std::vector<double> e, y;
  for (std::size_t i = 0; i < curve.points.size(); ++i) {
    e.push_back(curve.points[i].E);
    y.push_back(curve.density[i].real());
  }
  return resonance_extract(e, y, opts);
}

}  // namespace cldos
