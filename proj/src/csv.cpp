#include "cldos/csv.hpp"

#include <charconv>

namespace cldos::csv {

std::string number(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void write_provenance(std::ostream& out, std::string_view config_json) {
  out << "# config: " << config_json << '\n';
}

std::string read_provenance(std::string_view line) {
  constexpr std::string_view tag = "# config: ";
  if (line.substr(0, tag.size()) != tag) return {};
  return std::string(line.substr(tag.size()));
}

void write_potential(std::ostream& out, const PotentialSpec& spec, std::span<const double> xs) {
  out << "x,V\n";
  for (double x : xs) out << number(x) << ',' << number(spec(x)) << '\n';
}

void write_stationary_points(std::ostream& out, const std::vector<StationaryPoint>& points) {
  out << "x0,E0,order,kind\n";
  for (const auto& p : points)
    out << number(p.x0) << ',' << number(p.E0) << ',' << p.order << ','
        << (p.kind == ExtremumKind::maximum ? "maximum" : "minimum") << '\n';
}

void write_spectrum(std::ostream& out, const SpectralSet& set) {
  out << "re_E,im_E,label,theta,L,N\n";
  for (Eigen::Index k = 0; k < set.size(); ++k) {
    const bool res = k < Eigen::Index(set.labels.size()) && set.labels[k] == SpectralLabel::resonance;
    out << number(set.eigenvalues(k).real()) << ',' << number(set.eigenvalues(k).imag()) << ','
        << (set.labels.empty() ? "unlabeled" : res ? "resonance" : "background") << ','
        << number(set.theta) << ',' << number(set.basis.L) << ',' << set.basis.N << '\n';
  }
}

void write_density(std::ostream& out, const DensityCurve& curve) {
  out << "E,re_drho,im_drho,epsilon\n";
  for (std::size_t i = 0; i < curve.grid.size(); ++i)
    out << number(curve.grid[i]) << ',' << number(curve.values[i].real()) << ','
        << number(curve.values[i].imag()) << ',' << number(curve.epsilon) << '\n';
}

void write_phase(std::ostream& out, const PhaseCurve& curve) {
  out << "E,re_phi,im_phi\n";
  for (std::size_t i = 0; i < curve.grid.size(); ++i)
    out << number(curve.grid[i]) << ',' << number(curve.values[i].real()) << ','
        << number(curve.values[i].imag()) << '\n';
}

void write_time_shift(std::ostream& out, const TimeShiftCurve& curve) {
  out << "E,re_dT,im_dT,singular_flag\n";
  for (std::size_t i = 0; i < curve.grid.size(); ++i)
    out << number(curve.grid[i]) << ',' << number(curve.re_values[i]) << ','
        << number(curve.im_values[i]) << ',' << (curve.singular_flags[i] ? 1 : 0) << '\n';
}

void write_fits(std::ostream& out, const std::vector<SingularityFit>& fits) {
  out << "E0,model,amplitude,offset,exponent,gap_sigma,side,samples_below,samples_above,r2\n";
  for (const auto& f : fits)
    out << number(f.E0) << ',' << to_string(f.model) << ',' << number(f.amplitude) << ','
        << number(f.offset) << ',' << number(f.exponent) << ',' << number(f.gap_sigma) << ','
        << f.side << ',' << f.samples_below << ',' << f.samples_above << ',' << number(f.r2) << '\n';
}

void write_oracle(std::ostream& out, const OracleCurve& curve) {
  out << "E,re_T,im_T,re_R,im_R,re_phi_total,im_phi_total,re_drho,im_drho\n";
  for (std::size_t i = 0; i < curve.points.size(); ++i) {
    const auto& p = curve.points[i];
    out << number(p.E) << ',' << number(p.T.real()) << ',' << number(p.T.imag()) << ','
        << number(p.R.real()) << ',' << number(p.R.imag()) << ',' << number(p.Phi.real()) << ','
        << number(p.Phi.imag()) << ',' << number(curve.density[i].real()) << ','
        << number(curve.density[i].imag()) << '\n';
  }
}

void write_sharp_features(std::ostream& out, const OracleCurve& curve) {
  out << "E,phase_step\n";
  for (std::size_t k = 0; k < curve.sharp.size(); ++k)
    out << number(curve.sharp[k]) << ',' << number(curve.sharp_steps[k]) << '\n';
}

void write_resonances(std::ostream& out, const std::vector<ExtractedResonance>& peaks) {
  out << "E,Gamma,area,r2\n";
  for (const auto& p : peaks)
    out << number(p.E) << ',' << number(p.Gamma) << ',' << number(p.area) << ',' << number(p.r2) << '\n';
}

}  // namespace cldos::csv
