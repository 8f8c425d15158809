#include "cldos/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace cldos {

using nlohmann::json;

std::vector<std::string> RunConfig::violations() const {
  std::vector<std::string> out;
  auto need = [&](bool ok, const std::string& what) {
    if (!ok) out.push_back(what);
  };
  const auto& p = potential;
  need(std::isfinite(p.a) && std::isfinite(p.b) && std::isfinite(p.c),
       "potential: a, b, c must be finite");
  need(p.eta > 0.0 && std::isfinite(p.eta), "potential.eta must be > 0");
  need(classicality.hbar > 0.0, "classicality.hbar must be > 0");
  need(classicality.mass > 0.0, "classicality.mass must be > 0");
  need(std::isfinite(theta) && std::abs(2.0 * theta) < 0.5 * kPi,
       "theta must satisfy |2 theta| < pi/2");
  need(box.L > 0.0, "box.L must be > 0");
  need(box.N >= 1, "box.N must be >= 1");
  if (box.L > 0.0 && p.eta > 0.0 && std::abs(2.0 * theta) < 0.5 * kPi && !p.is_free()) {
    const double half = 0.5 * box.L;
    const double decay = p.eta * std::cos(2.0 * theta) * half * half;
    const double coeff = std::abs(p.a) + std::abs(p.b) + std::abs(p.c);
    const double wall = std::exp(-decay) * (std::abs(p.a) + std::abs(p.b) * half + std::abs(p.c) * half * half);
    need(wall <= 1e-12 * coeff, "box.L too small: scaled potential has not decayed at the walls");
  }
  need(epsilon >= 0.0 && std::isfinite(epsilon), "epsilon must be >= 0");
  need(grid.min > 0.0, "grid.min must be > 0");
  need(grid.max > grid.min, "grid.max must exceed grid.min");
  need(grid.count >= 2, "grid.count must be >= 2");
  need(oracle.slices_per_wavelength > 0.0, "oracle.slices_per_wavelength must be > 0");
  need(oracle.min_slices >= 1, "oracle.min_slices must be >= 1");
  need(oracle.refine_depth >= 0, "oracle.refine_depth must be >= 0");
  need(margin >= 0.0 && (theta == 0.0 || margin < 2.0 * std::abs(theta)),
       "margin must lie in [0, 2 theta)");
  need(stability.box_factor > 0.0, "stability.box_factor must be > 0");
  need(stability.theta_delta >= 0.0 &&
           std::abs(2.0 * (std::abs(theta) + stability.theta_delta)) < 0.5 * kPi,
       "stability.theta_delta must keep |2 theta| < pi/2");
  need(stability.tolerance > 0.0, "stability.tolerance must be > 0");
  need(compare.relative_tolerance > 0.0, "compare.relative_tolerance must be > 0");
  need(compare.min_fraction > 0.0 && compare.min_fraction <= 1.0,
       "compare.min_fraction must lie in (0, 1]");
  need(compare.exclusion >= 0.0, "compare.exclusion must be >= 0");
  need(contour.rectangles >= 1, "contour.rectangles must be >= 1");
  need(!output_dir.empty(), "output_dir must not be empty");
  return out;
}

void RunConfig::validate() const {
  const auto v = violations();
  if (v.empty()) return;
  std::ostringstream msg;
  msg << "invalid configuration (" << v.size() << " problem" << (v.size() > 1 ? "s" : "") << "):";
  for (const auto& s : v) msg << "\n  - " << s;
  throw ConfigError(msg.str());
}

void to_json(json& j, const RunConfig& c) {
  j = json{
      {"name", c.name},
      {"potential", {{"a", c.potential.a}, {"b", c.potential.b}, {"c", c.potential.c}, {"eta", c.potential.eta}}},
      {"classicality", {{"hbar", c.classicality.hbar}, {"mass", c.classicality.mass}}},
      {"theta", c.theta},
      {"box", {{"L", c.box.L}, {"N", c.box.N}}},
      {"epsilon", c.epsilon},
      {"grid", {{"min", c.grid.min}, {"max", c.grid.max}, {"count", c.grid.count}}},
      {"oracle", {{"slices_per_wavelength", c.oracle.slices_per_wavelength}, {"min_slices", c.oracle.min_slices},
                  {"refine_depth", c.oracle.refine_depth}}},
      {"margin", c.margin},
      {"stability", {{"box_factor", c.stability.box_factor}, {"theta_delta", c.stability.theta_delta},
                     {"tolerance", c.stability.tolerance}}},
      {"compare", {{"relative_tolerance", c.compare.relative_tolerance}, {"min_fraction", c.compare.min_fraction},
                   {"exclusion", c.compare.exclusion}}},
      {"contour", {{"rectangles", c.contour.rectangles}, {"seed", c.contour.seed}}},
      {"output_dir", c.output_dir},
  };
}

namespace {

// Reads the keys present in `j` into the listed fields and rejects anything else.
class Reader {
 public:
  Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + ": expected an object");
  }

  template <class T>
  Reader& field(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return *this;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(where_ + "." + key + ": " + e.what());
    }
    return *this;
  }

  template <class F>
  Reader& object(const char* key, F&& read) {
    seen_.insert(key);
    if (j_.contains(key)) read(Reader(j_.at(key), where_ + "." + key));
    return *this;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items())
      if (!seen_.count(key)) throw ConfigError(where_ + ": unknown key '" + key + "'");
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

}  // namespace

void from_json(const json& j, RunConfig& c) {
  Reader(j, "config")
      .field("name", c.name)
      .object("potential",
              [&](Reader r) {
                r.field("a", c.potential.a).field("b", c.potential.b).field("c", c.potential.c)
                    .field("eta", c.potential.eta).finish();
              })
      .object("classicality",
              [&](Reader r) { r.field("hbar", c.classicality.hbar).field("mass", c.classicality.mass).finish(); })
      .field("theta", c.theta)
      .object("box", [&](Reader r) { r.field("L", c.box.L).field("N", c.box.N).finish(); })
      .field("epsilon", c.epsilon)
      .object("grid",
              [&](Reader r) { r.field("min", c.grid.min).field("max", c.grid.max).field("count", c.grid.count).finish(); })
      .object("oracle",
              [&](Reader r) {
                r.field("slices_per_wavelength", c.oracle.slices_per_wavelength)
                    .field("min_slices", c.oracle.min_slices)
                    .field("refine_depth", c.oracle.refine_depth).finish();
              })
      .field("margin", c.margin)
      .object("stability",
              [&](Reader r) {
                r.field("box_factor", c.stability.box_factor).field("theta_delta", c.stability.theta_delta)
                    .field("tolerance", c.stability.tolerance).finish();
              })
      .object("compare",
              [&](Reader r) {
                r.field("relative_tolerance", c.compare.relative_tolerance)
                    .field("min_fraction", c.compare.min_fraction).field("exclusion", c.compare.exclusion).finish();
              })
      .object("contour",
              [&](Reader r) { r.field("rectangles", c.contour.rectangles).field("seed", c.contour.seed).finish(); })
      .field("output_dir", c.output_dir)
      .finish();
}

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c;
  from_json(j, c);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string dump_config(const RunConfig& c) { return json(c).dump(); }

std::vector<std::string> preset_names() {
  return {"paper-a", "paper-b", "paper-c", "desk-a", "desk-b", "desk-c"};
}

RunConfig preset(const std::string& name) {
  RunConfig c;
  c.name = name;
  const bool paper = name.rfind("paper-", 0) == 0;
  const bool desk = name.rfind("desk-", 0) == 0;
  const std::string which = paper ? name.substr(6) : desk ? name.substr(5) : "";
  if (which == "a") {
    c.potential = {1.0, 0.0, 0.0, 0.1};
    c.classicality = {0.1, 1.0};
    c.theta = 0.5;
    c.epsilon = 0.001;
  } else if (which == "b") {
    c.potential = {1.0, 0.0, 0.1, 0.1};
    c.classicality = {0.1, 1.0};
    c.theta = 0.5;
    c.epsilon = 0.001;
  } else if (which == "c") {
    c.potential = {0.346, -0.173, 0.173, 0.1};
    c.classicality = {0.058, 1.0};
    c.theta = 0.25;
    c.epsilon = 0.050;
  } else {
    std::ostringstream msg;
    msg << "unknown preset '" << name << "'; available:";
    for (const auto& n : preset_names()) msg << ' ' << n;
    throw ConfigError(msg.str());
  }
  c.margin = default_margin(c.theta);
  c.box = paper ? BoxBasis{500.0, 15000} : BoxBasis{100.0, 1500};
  return c;
}

std::vector<BoxPerturbation> stability_perturbations(const RunConfig& cfg) {
  const auto& s = cfg.stability;
  const double L = cfg.box.L;
  const int N = cfg.box.N;
  const int N_scaled = static_cast<int>(std::lround(s.box_factor * N));
  return {
      {s.box_factor * L, N_scaled, cfg.theta},
      {L, N_scaled, cfg.theta},
      {L, N, cfg.theta + s.theta_delta},
      {L, N, cfg.theta - s.theta_delta},
  };
}

}  // namespace cldos
