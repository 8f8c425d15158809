#pragma once

#include "cldos/config.hpp"
#include "cldos/density.hpp"
#include "cldos/oracle.hpp"
#include "cldos/semiclassics.hpp"

#include <ostream>
#include <span>
#include <vector>

namespace cldos {

/// Pointwise agreement of one part (real or imaginary) of two curves. Deviations are
/// |a - b| divided by the larger of max|a| and max|b| over the valid points.
struct PartAgreement {
  int valid = 0;
  int within = 0;
  double scale = 0.0;
  double max_deviation = 0.0;
  double fraction() const { return valid > 0 ? double(within) / valid : 0.0; }
};

PartAgreement part_agreement(std::span<const double> a, std::span<const double> b,
                             const std::vector<bool>& valid, double tolerance);

struct ResonanceMatch {
  Complex csm;            // E_k - i Gamma_k / 2
  bool eligible = false;  // wide enough to be resolved and below the energy cut
  bool found = false;     // an oracle peak exists at all
  double E = 0.0;         // nearest oracle peak
  double Gamma = 0.0;
  double dE = 0.0;
  double width_ratio = 0.0;  // Gamma_oracle / Gamma_k
  bool position_ok = false;
  bool width_ok = false;
  bool matched() const { return found && position_ok && width_ok; }
};

/// Pairs each CSM resonance with the nearest oracle peak. A resonance is eligible when
/// Gamma_k > min_gamma and E_k < max_energy; it matches when |dE| < max(1e-3, 0.1 Gamma_k)
/// and the widths agree within `width_tolerance` (relative).
std::vector<ResonanceMatch> cross_match(std::span<const Complex> resonances,
                                        const std::vector<ExtractedResonance>& peaks,
                                        double min_gamma, double max_energy,
                                        double width_tolerance = 0.25);

/// All three routes on one grid, in time units: pi hbar Delta rho (CSM), Delta T
/// (semiclassics) and pi hbar (1/pi) dPhi/dE (oracle, optional).
struct ComparisonReport {
  std::vector<double> grid;
  std::vector<Complex> csm;
  std::vector<Complex> semiclassical;
  std::vector<Complex> oracle;
  std::vector<bool> valid;  // above grid min and outside every excluded window
  PartAgreement re;
  PartAgreement im;
  std::vector<ResonanceMatch> matches;

  bool passed(const CompareConfig& cfg) const {
    return re.fraction() >= cfg.min_fraction && im.fraction() >= cfg.min_fraction;
  }
};

/// Compares the CSM density with the semiclassical time shift, dropping grid points
/// within cfg.exclusion of any stationary energy and any point flagged singular.
ComparisonReport compare_curves(const DensityCurve& density, const TimeShiftCurve& times,
                                const Classicality& cls, std::span<const double> stationary_energies,
                                const CompareConfig& cfg);

/// Adds the oracle column; the oracle grid must contain every report energy.
void attach_oracle(ComparisonReport& report, const OracleCurve& curve, const Classicality& cls);

void write_report(std::ostream& out, const ComparisonReport& report);
void write_matches(std::ostream& out, const std::vector<ResonanceMatch>& matches);
void print_summary(std::ostream& out, const ComparisonReport& report, const CompareConfig& cfg);

}  // namespace cldos
