#include "cldos/semiclassics.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <memory>
#include <numeric>

namespace cldos {

std::vector<Complex> TimeShiftCurve::signed_values() const {
  std::vector<Complex> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) out[i] = {re_values[i], -im_values[i]};
  return out;
}

double singular_halfwidth(std::span<const double> grid, double factor) {
  if (grid.size() < 2) return 0.0;
  return factor * (grid.back() - grid.front()) / double(grid.size() - 1);
}

SemiclassicalDensity scale_to_density(const TimeShiftCurve& curve, const Classicality& cls) {
  SemiclassicalDensity out;
  out.grid = curve.grid;
  out.singular_flags = curve.singular_flags;
  const double s = 1.0 / (kPi * cls.hbar);
  for (const Complex& t : curve.signed_values()) out.values.push_back(s * t);
  return out;
}

std::string to_string(SingularityModel m) {
  switch (m) {
    case SingularityModel::log: return "log";
    case SingularityModel::step: return "step";
    case SingularityModel::power_quarter: return "power_quarter";
  }
  return "unknown";
}

SingularityModel model_for(const StationaryPoint& sp, TimePart part) {
  if (sp.order >= 4) return SingularityModel::power_quarter;
  const bool maximum_of_relevant = (sp.kind == ExtremumKind::maximum) == (part == TimePart::real);
  return maximum_of_relevant ? SingularityModel::log : SingularityModel::step;
}

namespace {

struct Side {
  std::vector<double> dist;  // |E - E0|
  std::vector<double> y;
};

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
}

double sum_sq_dev(const std::vector<double>& v, double m) {
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s;
}

void require_samples(const Side& s, const char* which) {
  if (int(s.y.size()) < kMinSamplesPerSide) {
    throw std::invalid_argument(std::string("fit_singularity: insufficient samples ") + which +
                                " E0 (" + std::to_string(s.y.size()) + " < " +
                                std::to_string(kMinSamplesPerSide) + ")");
  }
}

// Ordinary least squares y ~ [x, 1]; returns slope, intercept, r2.
std::array<double, 3> line_fit(const std::vector<double>& x, const std::vector<double>& y) {
  const Eigen::Index n = Eigen::Index(x.size());
  Eigen::MatrixXd A(n, 2);
  VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    A(i, 0) = x[i];
    A(i, 1) = 1.0;
    b(i) = y[i];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  if (qr.rank() < 2) throw NumericalError("fit_singularity: degenerate fit matrix");
  const VectorXd c = qr.solve(b);
  const double ss_res = (A * c - b).squaredNorm();
  const double ss_tot = sum_sq_dev(y, mean(y));
  return {c(0), c(1), ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0};
}

}  // namespace

SingularityFit fit_singularity(std::span<const double> energies, std::span<const double> values,
                               std::span<const bool> excluded, const StationaryPoint& sp,
                               SingularityModel model, FitWindow window) {
  if (energies.size() != values.size() || (!excluded.empty() && excluded.size() != energies.size()))
    throw std::invalid_argument("fit_singularity: mismatched sample arrays");

  Side below, above;
  for (std::size_t i = 0; i < energies.size(); ++i) {
    if (!excluded.empty() && excluded[i]) continue;
    const double d = energies[i] - sp.E0;
    const double ad = std::abs(d);
    if (ad < window.inner || ad > window.outer || ad == 0.0) continue;
    Side& s = d < 0.0 ? below : above;
    s.dist.push_back(ad);
    s.y.push_back(values[i]);
  }

  SingularityFit fit;
  fit.E0 = sp.E0;
  fit.model = model;
  fit.samples_below = int(below.y.size());
  fit.samples_above = int(above.y.size());

  switch (model) {
    case SingularityModel::log: {
      require_samples(below, "below");
      require_samples(above, "above");
      std::vector<double> x, y;
      for (const Side* s : {&below, &above}) {
        for (std::size_t i = 0; i < s->y.size(); ++i) {
          x.push_back(std::log(s->dist[i]));
          y.push_back(s->y[i]);
        }
      }
      const auto [slope, intercept, r2] = line_fit(x, y);
      fit.amplitude = slope;
      fit.offset = intercept;
      fit.r2 = r2;
      break;
    }
    case SingularityModel::step: {
      require_samples(below, "below");
      require_samples(above, "above");
      const double mb = mean(below.y);
      const double ma = mean(above.y);
      const double ss_within = sum_sq_dev(below.y, mb) + sum_sq_dev(above.y, ma);
      const double n = double(below.y.size() + above.y.size());
      const double sigma = std::sqrt(ss_within / n);
      fit.amplitude = ma - mb;
      fit.offset = mb;
      fit.gap_sigma = sigma > 0.0 ? std::abs(ma - mb) / sigma : std::numeric_limits<double>::infinity();
      std::vector<double> all = below.y;
      all.insert(all.end(), above.y.begin(), above.y.end());
      const double ss_tot = sum_sq_dev(all, mean(all));
      fit.r2 = ss_tot > 0.0 ? 1.0 - ss_within / ss_tot : 1.0;
      break;
    }
    case SingularityModel::power_quarter: {
      // The divergent side carries the larger magnitude at the innermost sample.
      auto inner_magnitude = [](const Side& s) {
        if (s.y.empty()) return -1.0;
        const auto it = std::min_element(s.dist.begin(), s.dist.end());
        return std::abs(s.y[std::size_t(it - s.dist.begin())]);
      };
      const bool use_above = inner_magnitude(above) >= inner_magnitude(below);
      const Side& s = use_above ? above : below;
      require_samples(s, use_above ? "above" : "below");
      std::vector<double> x, y;
      for (std::size_t i = 0; i < s.y.size(); ++i) {
        if (s.y[i] == 0.0) continue;
        x.push_back(std::log(s.dist[i]));
        y.push_back(std::log(std::abs(s.y[i])));
      }
      if (int(x.size()) < kMinSamplesPerSide)
        throw std::invalid_argument("fit_singularity: insufficient nonzero samples on divergent side");
      const auto [slope, intercept, r2] = line_fit(x, y);
      fit.exponent = slope;
      fit.amplitude = std::exp(intercept);
      fit.r2 = r2;
      fit.side = use_above ? 1 : -1;
      break;
    }
  }
  return fit;
}

SingularityFit fit_singularity(const TimeShiftCurve& curve, TimePart part,
                               const StationaryPoint& sp, FitWindow window) {
  const auto& y = part == TimePart::real ? curve.re_values : curve.im_values;
  // std::vector<bool> is not contiguous, so copy into a plain array for the span.
  const std::size_t n = curve.singular_flags.size();
  auto excluded = std::make_unique<bool[]>(n);
  for (std::size_t i = 0; i < n; ++i) excluded[i] = curve.singular_flags[i];
  return fit_singularity(curve.grid, y, std::span<const bool>(excluded.get(), n), sp,
                         model_for(sp, part), window);
}

SingularityFit fit_singularity(const DensityCurve& curve, TimePart part,
                               const StationaryPoint& sp, FitWindow window) {
  std::vector<double> y;
  for (const Complex& v : curve.values) y.push_back(part == TimePart::real ? v.real() : v.imag());
  return fit_singularity(curve.grid, y, {}, sp, model_for(sp, part), window);
}

}  // namespace cldos
