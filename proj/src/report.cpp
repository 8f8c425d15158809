#include "cldos/report.hpp"

#include "cldos/csv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cldos {

PartAgreement part_agreement(std::span<const double> a, std::span<const double> b,
                             const std::vector<bool>& valid, double tolerance) {
  PartAgreement out;
  double max_a = 0.0;
  double max_b = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!valid[i]) continue;
    max_a = std::max(max_a, std::abs(a[i]));
    max_b = std::max(max_b, std::abs(b[i]));
  }
  out.scale = std::max(max_a, max_b);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!valid[i]) continue;
    ++out.valid;
    const double dev = out.scale > 0.0 ? std::abs(a[i] - b[i]) / out.scale : 0.0;
    out.max_deviation = std::max(out.max_deviation, dev);
    if (dev < tolerance) ++out.within;
  }
  return out;
}

std::vector<ResonanceMatch> cross_match(std::span<const Complex> resonances,
                                        const std::vector<ExtractedResonance>& peaks,
                                        double min_gamma, double max_energy,
                                        double width_tolerance) {
  std::vector<ResonanceMatch> out;
  for (const Complex& r : resonances) {
    ResonanceMatch m;
    m.csm = r;
    const double Ek = r.real();
    const double Gk = -2.0 * r.imag();
    m.eligible = Gk > min_gamma && Ek < max_energy;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : peaks) {
      if (std::abs(p.E - Ek) < best) {
        best = std::abs(p.E - Ek);
        m.found = true;
        m.E = p.E;
        m.Gamma = p.Gamma;
      }
    }
    if (m.found) {
      m.dE = m.E - Ek;
      m.width_ratio = Gk > 0.0 ? m.Gamma / Gk : std::numeric_limits<double>::infinity();
      m.position_ok = std::abs(m.dE) < std::max(1e-3, 0.1 * Gk);
      m.width_ok = std::abs(m.width_ratio - 1.0) <= width_tolerance;
    }
    out.push_back(m);
  }
  return out;
}

ComparisonReport compare_curves(const DensityCurve& density, const TimeShiftCurve& times,
                                const Classicality& cls, std::span<const double> stationary_energies,
                                const CompareConfig& cfg) {
  if (density.grid != times.grid)
    throw std::invalid_argument("compare_curves: density and time-shift grids differ");
  ComparisonReport out;
  out.grid = density.grid;
  const double scale = kPi * cls.hbar;
  const auto signed_times = times.signed_values();
  const std::size_t n = out.grid.size();
  std::vector<double> re_a(n), re_b(n), im_a(n), im_b(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.csm.push_back(scale * density.values[i]);
    out.semiclassical.push_back(signed_times[i]);
    bool ok = !times.singular_flags[i];
    for (double e0 : stationary_energies) ok = ok && std::abs(out.grid[i] - e0) >= cfg.exclusion;
    out.valid.push_back(ok);
    re_a[i] = out.csm[i].real();
    re_b[i] = out.semiclassical[i].real();
    im_a[i] = out.csm[i].imag();
    im_b[i] = out.semiclassical[i].imag();
  }
  out.re = part_agreement(re_a, re_b, out.valid, cfg.relative_tolerance);
  out.im = part_agreement(im_a, im_b, out.valid, cfg.relative_tolerance);
  return out;
}

void attach_oracle(ComparisonReport& report, const OracleCurve& curve, const Classicality& cls) {
  const auto energies = curve.grid();
  report.oracle.clear();
  for (double E : report.grid) {
    const auto it = std::lower_bound(energies.begin(), energies.end(), E);
    if (it == energies.end() || *it != E)
      throw std::invalid_argument("attach_oracle: oracle curve lacks report energy " + csv::number(E));
    report.oracle.push_back(kPi * cls.hbar * curve.density[std::size_t(it - energies.begin())]);
  }
}

void write_report(std::ostream& out, const ComparisonReport& r) {
  out << "E,re_csm,im_csm,re_dT,im_dT,re_oracle,im_oracle,valid\n";
  for (std::size_t i = 0; i < r.grid.size(); ++i) {
    out << csv::number(r.grid[i]) << ',' << csv::number(r.csm[i].real()) << ','
        << csv::number(r.csm[i].imag()) << ',' << csv::number(r.semiclassical[i].real()) << ','
        << csv::number(r.semiclassical[i].imag()) << ',';
    if (r.oracle.empty())
      out << ",,";
    else
      out << csv::number(r.oracle[i].real()) << ',' << csv::number(r.oracle[i].imag()) << ',';
    out << (r.valid[i] ? 1 : 0) << '\n';
  }
}

void write_matches(std::ostream& out, const std::vector<ResonanceMatch>& matches) {
  out << "re_E,im_E,Gamma,eligible,found,E_oracle,Gamma_oracle,dE,width_ratio,matched\n";
  for (const auto& m : matches) {
    out << csv::number(m.csm.real()) << ',' << csv::number(m.csm.imag()) << ','
        << csv::number(-2.0 * m.csm.imag()) << ',' << int(m.eligible) << ',' << int(m.found) << ','
        << csv::number(m.E) << ',' << csv::number(m.Gamma) << ',' << csv::number(m.dE) << ','
        << csv::number(m.width_ratio) << ',' << int(m.matched()) << '\n';
  }
}

void print_summary(std::ostream& out, const ComparisonReport& r, const CompareConfig& cfg) {
  auto line = [&](const char* part, const PartAgreement& a) {
    out << part << ": " << a.within << "/" << a.valid << " points within "
        << cfg.relative_tolerance * 100.0 << "% (fraction " << a.fraction() << ", max deviation "
        << a.max_deviation << ", scale " << a.scale << ")\n";
  };
  line("re", r.re);
  line("im", r.im);
  out << (r.passed(cfg) ? "agreement: pass" : "agreement: fail") << " (required fraction "
      << cfg.min_fraction << ")\n";
}

}  // namespace cldos
