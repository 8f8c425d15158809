#pragma once

#include "cldos/csm.hpp"
#include "cldos/model.hpp"
#include "cldos/oracle.hpp"
#include "cldos/types.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace cldos {

struct EnergyGrid {
  double min = 0.1;  // the subtraction of free and interacting spectra breaks down near E = 0
  double max = 2.0;
  int count = 1901;

  std::vector<double> points() const { return linspace(min, max, count); }
  bool operator==(const EnergyGrid&) const = default;
};

/// Box and angle perturbations used by the stabilization scan.
struct StabilityConfig {
  double box_factor = 1.2;     // L -> factor L and N -> factor N (one run each)
  double theta_delta = 0.05;   // theta -> theta +- delta (two runs)
  double tolerance = 1e-4;     // complex drift allowed for a resonance
  bool operator==(const StabilityConfig&) const = default;
};

struct CompareConfig {
  double relative_tolerance = 0.15;
  double min_fraction = 0.9;
  double exclusion = 0.08;  // half-width of the window dropped around each stationary energy
  bool operator==(const CompareConfig&) const = default;
};

struct ContourConfig {
  int rectangles = 20;
  unsigned seed = 1;
  bool operator==(const ContourConfig&) const = default;
};

struct RunConfig {
  std::string name = "custom";
  PotentialSpec potential{1.0, 0.0, 0.0, 0.1};
  Classicality classicality;
  double theta = 0.5;
  BoxBasis box;
  double epsilon = 0.001;
  EnergyGrid grid;
  OracleResolution oracle;
  double margin = 0.1;  // angular classification margin, radians
  StabilityConfig stability;
  CompareConfig compare;
  ContourConfig contour;
  std::string output_dir = ".";

  double x_L() const { return -0.5 * box.L; }
  double x_R() const { return 0.5 * box.L; }

  /// Every violated precondition, one message each; empty when the config is usable.
  std::vector<std::string> violations() const;
  /// Throws ConfigError listing all violations.
  void validate() const;

  bool operator==(const RunConfig&) const = default;
};

void to_json(nlohmann::json& j, const RunConfig& c);
/// Fields absent from `j` keep their defaults; unknown keys raise ConfigError.
void from_json(const nlohmann::json& j, RunConfig& c);

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
std::string dump_config(const RunConfig& c);  // single line

/// paper-a, paper-b, paper-c at full scale (L = 500, N = 15000) and desk-a/b/c at L = 100, N = 1500.
std::vector<std::string> preset_names();
RunConfig preset(const std::string& name);

/// Box and angle perturbations implied by cfg.stability.
std::vector<BoxPerturbation> stability_perturbations(const RunConfig& cfg);

}  // namespace cldos
