// Command-line driver: resolves a RunConfig, runs one computation and writes CSV
// artifacts that each start with the resolved config.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure,
// 4 agreement thresholds missed under `compare --check`.
#include "cldos/config.hpp"
#include "cldos/csm.hpp"
#include "cldos/csv.hpp"
#include "cldos/density.hpp"
#include "cldos/model.hpp"
#include "cldos/oracle.hpp"
#include "cldos/report.hpp"
#include "cldos/semiclassics.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace cldos;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitCheck = 4;

struct Sources {
  std::string config_path;
  std::string preset_name;
  std::vector<std::string> sets;  // key.path=value
  std::optional<double> theta, epsilon, hbar, L, grid_min, grid_max;
  std::optional<int> N, grid_count;
  std::string out;
};

// A config file is either a JSON document or an artifact whose first line is a
// provenance record.
json read_config_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  std::string text = buf.str();
  const std::string first = text.substr(0, text.find('\n'));
  if (const std::string embedded = csv::read_provenance(first); !embedded.empty()) text = embedded;
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": not valid JSON: " + e.what());
  }
}

// "grid.count=401" sets /grid/count. The value is parsed as JSON, falling back to a
// plain string so that `name=run1` works without quotes.
void apply_set(json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + assignment + "'");
  std::string pointer;
  std::stringstream keys(assignment.substr(0, eq));
  for (std::string key; std::getline(keys, key, '.');) pointer += "/" + key;
  const std::string text = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }
  try {
    j[json::json_pointer(pointer)] = value;
  } catch (const json::exception& e) {
    throw ConfigError("--set " + assignment + ": " + e.what());
  }
}

RunConfig resolve(const Sources& src) {
  if (!src.config_path.empty() && !src.preset_name.empty())
    throw ConfigError("--config and --preset are mutually exclusive");
  json j;
  bool dir_given = false;
  if (!src.config_path.empty()) {
    const json file = read_config_json(src.config_path);
    dir_given = file.is_object() && file.contains("output_dir");
    RunConfig base;
    from_json(file, base);
    j = base;
  } else if (!src.preset_name.empty()) {
    j = preset(src.preset_name);
  } else {
    j = RunConfig{};
  }

  for (const auto& s : src.sets) {
    apply_set(j, s);
    dir_given = dir_given || s.rfind("output_dir=", 0) == 0;
  }
  auto put = [&](const char* pointer, const auto& v) {
    if (v) j[json::json_pointer(pointer)] = *v;
  };
  put("/theta", src.theta);
  put("/epsilon", src.epsilon);
  put("/classicality/hbar", src.hbar);
  put("/box/L", src.L);
  put("/box/N", src.N);
  put("/grid/min", src.grid_min);
  put("/grid/max", src.grid_max);
  put("/grid/count", src.grid_count);

  if (!src.out.empty()) {
    j["output_dir"] = src.out;
  } else if (const char* env = std::getenv("CLDOS_OUTPUT_DIR"); env && *env && !dir_given) {
    j["output_dir"] = env;
  }

  RunConfig cfg;
  from_json(j, cfg);
  cfg.validate();
  return cfg;
}

class Artifacts {
 public:
  explicit Artifacts(const RunConfig& cfg) : dir_(cfg.output_dir), provenance_(dump_config(cfg)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_)) throw ConfigError("output directory " + dir_.string() + " is not writable");
  }

  void write(const std::string& name, const std::function<void(std::ostream&)>& body) const {
    const fs::path path = dir_ / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    csv::write_provenance(out, provenance_);
    body(out);
    out.close();
    if (!out) throw ConfigError("failed writing " + path.string());
    std::cout << "wrote " << path.string() << '\n';
  }

 private:
  fs::path dir_;
  std::string provenance_;
};

struct Spectra {
  SpectralSet interacting;
  SpectralSet free;
};

Spectra solve_spectra(const RunConfig& cfg) {
  Spectra s;
  s.interacting = classify(eigensolve(assemble(cfg.potential, cfg.box, cfg.classicality, cfg.theta)),
                           cfg.theta, cfg.margin);
  s.free = classify(eigensolve(assemble(std::nullopt, cfg.box, cfg.classicality, cfg.theta)), cfg.theta,
                    cfg.margin);
  return s;
}

StabilizationReport stabilize(const RunConfig& cfg, const SpectralSet& interacting) {
  return stabilization_scan(interacting, cfg.potential, cfg.classicality, stability_perturbations(cfg),
                            cfg.stability.tolerance);
}

void write_stability(std::ostream& out, const StabilizationReport& r) {
  out << "re_E,im_E,Gamma,drift,stable\n";
  for (const auto& d : r.resonances)
    out << csv::number(d.value.real()) << ',' << csv::number(d.value.imag()) << ','
        << csv::number(-2.0 * d.value.imag()) << ',' << csv::number(d.drift) << ',' << (d.stable ? 1 : 0) << '\n';
}

int run_potential(const RunConfig& cfg, int samples) {
  if (samples < 2) throw ConfigError("--samples must be >= 2");
  // x_L + (x_R - x_L) i / (n - 1) keeps x = 0 exact for odd n on a symmetric box.
  std::vector<double> xs(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) xs[i] = cfg.x_L() + (cfg.x_R() - cfg.x_L()) * i / (samples - 1);
  const Artifacts art(cfg);
  art.write("potential.csv", [&](std::ostream& o) { csv::write_potential(o, cfg.potential, xs); });
  art.write("stationary_points.csv",
            [&](std::ostream& o) { csv::write_stationary_points(o, stationary_points(cfg.potential)); });
  return 0;
}

int run_spectrum(const RunConfig& cfg) {
  const Spectra s = solve_spectra(cfg);
  const Artifacts art(cfg);
  art.write("spectrum.csv", [&](std::ostream& o) { csv::write_spectrum(o, s.interacting); });
  art.write("spectrum_free.csv", [&](std::ostream& o) { csv::write_spectrum(o, s.free); });
  std::cout << s.interacting.resonances().size() << " of " << s.interacting.size()
            << " eigenvalues labeled resonance\n";
  return 0;
}

int run_density(const RunConfig& cfg) {
  const Spectra s = solve_spectra(cfg);
  const auto grid = cfg.grid.points();
  const auto curve = density_curve(s.interacting, s.free, grid, cfg.epsilon);
  const auto phase = integrate_phase(curve, s.interacting, s.free);
  const Artifacts art(cfg);
  art.write("density.csv", [&](std::ostream& o) { csv::write_density(o, curve); });
  art.write("phase.csv", [&](std::ostream& o) { csv::write_phase(o, phase); });
  return 0;
}

int run_timeshift(const RunConfig& cfg) {
  const auto grid = cfg.grid.points();
  const auto curve = time_shift_curve(cfg.potential, cfg.classicality, grid, cfg.x_L(), cfg.x_R());
  // One fit per stationary point and part, over the grid samples within 0.1 of E0.
  std::vector<SingularityFit> fits;
  for (const auto& sp : stationary_points(cfg.potential)) {
    for (TimePart part : {TimePart::real, TimePart::imaginary}) {
      try {
        fits.push_back(fit_singularity(curve, part, sp, {0.0, 0.1}));
      } catch (const std::invalid_argument& e) {
        std::cerr << "note: no fit at E0 = " << sp.E0 << ": " << e.what() << '\n';
      }
    }
  }
  const Artifacts art(cfg);
  art.write("timeshift.csv", [&](std::ostream& o) { csv::write_time_shift(o, curve); });
  art.write("fits.csv", [&](std::ostream& o) { csv::write_fits(o, fits); });
  return 0;
}

int run_scatter(const RunConfig& cfg, double min_prominence) {
  const auto grid = cfg.grid.points();
  const auto curve = oracle_density(cfg.potential, cfg.classicality, grid, cfg.x_L(), cfg.x_R(), cfg.oracle);
  const auto peaks = resonance_extract(curve, {.min_prominence = min_prominence});
  const Artifacts art(cfg);
  art.write("oracle.csv", [&](std::ostream& o) { csv::write_oracle(o, curve); });
  art.write("sharp_features.csv", [&](std::ostream& o) { csv::write_sharp_features(o, curve); });
  art.write("oracle_resonances.csv", [&](std::ostream& o) { csv::write_resonances(o, peaks); });
  return 0;
}

struct CompareOptions {
  bool check = false;
  bool oracle = true;
  bool stabilize = false;
  double min_prominence = 0.5;
};

int run_compare(const RunConfig& cfg, const CompareOptions& opt) {
  const Spectra s = solve_spectra(cfg);
  const auto grid = cfg.grid.points();
  const auto density = density_curve(s.interacting, s.free, grid, cfg.epsilon);
  const auto times = time_shift_curve(cfg.potential, cfg.classicality, grid, cfg.x_L(), cfg.x_R());
  auto report = compare_curves(density, times, cfg.classicality, cfg.potential.critical_energies(), cfg.compare);

  std::optional<StabilizationReport> scan;
  if (opt.stabilize) scan = stabilize(cfg, s.interacting);
  if (opt.oracle) {
    const auto curve = oracle_density(cfg.potential, cfg.classicality, grid, cfg.x_L(), cfg.x_R(), cfg.oracle);
    attach_oracle(report, curve, cfg.classicality);
    const auto peaks = resonance_extract(curve, {.min_prominence = opt.min_prominence});
    const auto candidates = scan ? scan->stable() : s.interacting.resonances();
    const double spacing = (grid.back() - grid.front()) / double(grid.size() - 1);
    report.matches = cross_match(candidates, peaks, 2.0 * spacing, 1.0);
  }

  const Artifacts art(cfg);
  art.write("compare.csv", [&](std::ostream& o) { write_report(o, report); });
  if (opt.oracle) art.write("matches.csv", [&](std::ostream& o) { write_matches(o, report.matches); });
  if (scan) art.write("stability.csv", [&](std::ostream& o) { write_stability(o, *scan); });
  print_summary(std::cout, report, cfg.compare);
  if (opt.oracle) {
    int eligible = 0, matched = 0;
    for (const auto& m : report.matches) {
      eligible += m.eligible;
      matched += m.eligible && m.matched();
    }
    std::cout << "resonances: " << matched << "/" << eligible << " eligible matched by oracle peaks\n";
  }
  return opt.check && !report.passed(cfg.compare) ? kExitCheck : 0;
}

int run_stability(const RunConfig& cfg) {
  const auto interacting = classify(eigensolve(assemble(cfg.potential, cfg.box, cfg.classicality, cfg.theta)),
                                    cfg.theta, cfg.margin);
  const auto scan = stabilize(cfg, interacting);
  const Artifacts art(cfg);
  art.write("stability.csv", [&](std::ostream& o) { write_stability(o, scan); });
  std::cout << scan.stable().size() << " of " << scan.resonances.size() << " resonances stable within "
            << cfg.stability.tolerance << '\n';
  return 0;
}

// Random rectangles below the real axis, each clear of every eigenvalue by 1e-6.
int run_contour(const RunConfig& cfg) {
  const Spectra s = solve_spectra(cfg);
  std::mt19937 rng(cfg.contour.seed);
  const double span = cfg.grid.max - cfg.grid.min;
  std::uniform_real_distribution<double> re0(cfg.grid.min, cfg.grid.max), width(0.01 * span, 0.25 * span),
      im1(-1.0, 0.02), height(0.02, 0.6);

  std::ostringstream rows;
  int failures = 0;
  for (int drawn = 0; drawn < cfg.contour.rectangles;) {
    Rectangle r;
    r.re_min = re0(rng);
    r.re_max = r.re_min + width(rng);
    r.im_max = im1(rng);
    r.im_min = r.im_max - height(rng);
    bool clear = true;
    for (const SpectralSet* set : {&s.interacting, &s.free})
      for (Eigen::Index k = 0; k < set->size(); ++k) clear = clear && r.boundary_distance(set->eigenvalues(k)) > 1e-6;
    if (!clear) continue;
    ++drawn;
    const long enclosed = enclosed_difference(s.interacting, s.free, r);
    rows << csv::number(r.re_min) << ',' << csv::number(r.re_max) << ',' << csv::number(r.im_min) << ','
         << csv::number(r.im_max) << ',' << enclosed << ',';
    try {
      const auto c = contour_count(s.interacting, s.free, r);
      const bool ok = c.count == enclosed;
      failures += !ok;
      rows << c.count << ',' << csv::number(c.integral.real()) << ',' << csv::number(c.integral.imag()) << ','
           << csv::number(c.residual) << ',' << (ok ? "ok" : "mismatch") << '\n';
    } catch (const NumericalError& e) {
      ++failures;
      std::cerr << "rectangle " << drawn << ": " << e.what() << '\n';
      rows << ",,,,error\n";
    }
  }
  const Artifacts art(cfg);
  art.write("contour.csv", [&](std::ostream& o) {
    o << "re_min,re_max,im_min,im_max,enclosed,count,re_integral,im_integral,residual,status\n" << rows.str();
  });
  std::cout << cfg.contour.rectangles - failures << "/" << cfg.contour.rectangles << " rectangles counted exactly\n";
  return failures == 0 ? 0 : kExitNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Continuum level density by complex scaling, semiclassical time shifts and direct scattering"};
  app.require_subcommand(1);
  app.fallthrough();  // global options may follow the subcommand

  Sources src;
  app.add_option("--config", src.config_path, "JSON config, or an artifact whose provenance line is reused");
  app.add_option("--preset", src.preset_name, "named config: paper-a/b/c (full scale) or desk-a/b/c");
  app.add_option("--set", src.sets, "override one field, e.g. --set grid.count=401 (repeatable)");
  app.add_option("--theta", src.theta, "scaling angle");
  app.add_option("--epsilon", src.epsilon, "smoothing distance above the real axis");
  app.add_option("--hbar", src.hbar, "Planck constant (mass stays as configured)");
  app.add_option("--L", src.L, "box length");
  app.add_option("--N", src.N, "number of box states");
  app.add_option("--grid-min", src.grid_min, "lowest grid energy");
  app.add_option("--grid-max", src.grid_max, "highest grid energy");
  app.add_option("--grid-count", src.grid_count, "number of grid energies");
  app.add_option("--out", src.out, "output directory (default: $CLDOS_OUTPUT_DIR, then the config's)");

  int samples = 2001;
  CompareOptions cmp;
  double scatter_prominence = cmp.min_prominence;

  auto* potential = app.add_subcommand("potential", "V(x) samples over the box and stationary points");
  potential->add_option("--samples", samples, "number of x samples");
  auto* spectrum = app.add_subcommand("spectrum", "complex-scaled eigenvalues with resonance labels");
  auto* density = app.add_subcommand("density", "smoothed continuum level density and its phase");
  auto* timeshift = app.add_subcommand("timeshift", "semiclassical time shift and singularity fits");
  auto* scatter = app.add_subcommand("scatter", "direct-scattering oracle curve and its Lorentzian peaks");
  scatter->add_option("--min-prominence", scatter_prominence, "absolute peak prominence floor");
  auto* compare = app.add_subcommand("compare", "density against time shift (and oracle) on one grid");
  compare->add_flag("--check", cmp.check, "exit 4 when the agreement thresholds are missed");
  compare->add_flag("!--no-oracle", cmp.oracle, "skip the direct-scattering column and resonance matching");
  compare->add_flag("--stabilize", cmp.stabilize, "match only resonances that survive the stability scan");
  compare->add_option("--min-prominence", cmp.min_prominence, "absolute peak prominence floor");
  auto* stability = app.add_subcommand("stability", "resonance drift under box and angle perturbations");
  auto* contour = app.add_subcommand("contour", "residue counts on random rectangles");
  auto* show = app.add_subcommand("config", "print the resolved config as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    const RunConfig cfg = resolve(src);
    if (*show) {
      std::cout << json(cfg).dump(2) << '\n';
      return 0;
    }
    if (*potential) return run_potential(cfg, samples);
    if (*spectrum) return run_spectrum(cfg);
    if (*density) return run_density(cfg);
    if (*timeshift) return run_timeshift(cfg);
    if (*scatter) return run_scatter(cfg, scatter_prominence);
    if (*compare) return run_compare(cfg, cmp);
    if (*stability) return run_stability(cfg);
    if (*contour) return run_contour(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
  return 0;
}
