#pragma once

#include "cldos/csm.hpp"
#include "cldos/density.hpp"
#include "cldos/model.hpp"
#include "cldos/oracle.hpp"
#include "cldos/semiclassics.hpp"

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace cldos::csv {

/// Shortest decimal text that parses back to exactly `x`.
std::string number(double x);

/// Every artifact starts with "# config: <json>" so it can be reproduced.
void write_provenance(std::ostream& out, std::string_view config_json);
/// Recovers the JSON text from a provenance line; empty if the line is not one.
std::string read_provenance(std::string_view line);

void write_potential(std::ostream& out, const PotentialSpec& spec, std::span<const double> xs);
void write_stationary_points(std::ostream& out, const std::vector<StationaryPoint>& points);
void write_spectrum(std::ostream& out, const SpectralSet& set);
void write_density(std::ostream& out, const DensityCurve& curve);
void write_phase(std::ostream& out, const PhaseCurve& curve);
void write_time_shift(std::ostream& out, const TimeShiftCurve& curve);
void write_fits(std::ostream& out, const std::vector<SingularityFit>& fits);
void write_oracle(std::ostream& out, const OracleCurve& curve);
void write_sharp_features(std::ostream& out, const OracleCurve& curve);
void write_resonances(std::ostream& out, const std::vector<ExtractedResonance>& peaks);

}  // namespace cldos::csv
