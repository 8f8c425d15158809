#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cldos/config.hpp"
#include "cldos/csv.hpp"

#include <charconv>
#include <limits>
#include <sstream>

using namespace cldos;

namespace {

bool mentions(const std::vector<std::string>& v, const std::string& needle) {
  return std::any_of(v.begin(), v.end(), [&](const std::string& s) { return s.find(needle) != std::string::npos; });
}

}  // namespace

TEST_CASE("presets carry the published parameters") {
  const auto a = preset("paper-a");
  CHECK(a.potential == PotentialSpec{1.0, 0.0, 0.0, 0.1});
  CHECK(a.theta == 0.5);
  CHECK(a.classicality.hbar / std::sqrt(a.classicality.mass) == doctest::Approx(0.1));
  CHECK(a.epsilon == 0.001);
  CHECK(a.box.L == 500.0);
  CHECK(a.box.N == 15000);

  const auto b = preset("paper-b");
  CHECK(b.potential == PotentialSpec{1.0, 0.0, 0.1, 0.1});
  CHECK(b.epsilon == 0.001);

  const auto c = preset("paper-c");
  CHECK(c.potential == PotentialSpec{0.346, -0.173, 0.173, 0.1});
  CHECK(c.theta == 0.25);
  CHECK(c.classicality.hbar == doctest::Approx(0.058));
  CHECK(c.epsilon == 0.050);

  for (const char* which : {"a", "b", "c"}) {
    auto paper = preset(std::string("paper-") + which);
    const auto desk = preset(std::string("desk-") + which);
    CHECK(desk.box.L == 100.0);
    CHECK(desk.box.N == 1500);
    // Identical physics apart from the box and the name.
    paper.box = desk.box;
    paper.name = desk.name;
    CHECK(paper == desk);
    CHECK(desk.violations().empty());
  }
  CHECK(preset_names().size() == 6);
  CHECK_THROWS_AS(preset("paper-d"), ConfigError);
}

TEST_CASE("JSON round trip is exact") {
  for (const auto& name : preset_names()) {
    const auto cfg = preset(name);
    CHECK(parse_config(dump_config(cfg)) == cfg);
  }
  RunConfig odd = preset("desk-c");
  odd.theta = 0.1 + 0.2;  // not the double nearest 0.3
  odd.epsilon = std::nextafter(0.05, 1.0);
  odd.grid = {0.123456789012345, 1.9876543210987654, 777};
  odd.contour.seed = 4000000000u;
  CHECK(parse_config(dump_config(odd)) == odd);
  CHECK(dump_config(odd).find('\n') == std::string::npos);
}

TEST_CASE("partial documents keep defaults and unknown keys are rejected") {
  const auto cfg = parse_config(R"({"theta": 0.3, "box": {"N": 200}})");
  CHECK(cfg.theta == 0.3);
  CHECK(cfg.box.N == 200);
  CHECK(cfg.box.L == RunConfig{}.box.L);
  CHECK(cfg.grid == EnergyGrid{});

  CHECK_THROWS_AS(parse_config(R"({"thetta": 0.3})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"box": {"L": 100, "M": 3}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"box": {"N": "many"}})"), ConfigError);
  CHECK_THROWS_AS(parse_config("{not json"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/cldos.json"), ConfigError);
}

TEST_CASE("violations enumerate every problem") {
  RunConfig cfg = preset("desk-a");
  cfg.classicality.hbar = -1.0;
  cfg.theta = 0.9;
  cfg.box.L = 10.0;
  cfg.grid.max = 0.05;
  cfg.oracle.refine_depth = -1;
  cfg.compare.min_fraction = 1.5;
  const auto v = cfg.violations();
  CHECK(mentions(v, "hbar"));
  CHECK(mentions(v, "theta"));
  CHECK(mentions(v, "grid.max"));
  CHECK(mentions(v, "refine_depth"));
  CHECK(mentions(v, "min_fraction"));
  CHECK(v.size() >= 5);
  try {
    cfg.validate();
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    for (const auto& s : v) CHECK(std::string(e.what()).find(s) != std::string::npos);
  }

  RunConfig small = preset("desk-a");
  small.box.L = 10.0;
  CHECK(mentions(small.violations(), "box.L too small"));
}

TEST_CASE("stability perturbations") {
  const auto cfg = preset("desk-a");
  const auto p = stability_perturbations(cfg);
  REQUIRE(p.size() == 4);
  CHECK(p[0].L == doctest::Approx(120.0));
  CHECK(p[0].N == 1800);
  CHECK(p[1].L == 100.0);
  CHECK(p[1].N == 1800);
  CHECK(p[2].theta == doctest::Approx(0.55));
  CHECK(p[3].theta == doctest::Approx(0.45));
}

TEST_CASE("csv numbers are shortest round-trip text") {
  CHECK(csv::number(0.1) == "0.1");
  CHECK(csv::number(1.0) == "1");
  CHECK(csv::number(-2.5e-300) == "-2.5e-300");
  for (double x : {0.1 + 0.2, std::numeric_limits<double>::min(), 1.0 / 3.0, -123456.789e10, kPi}) {
    const std::string s = csv::number(x);
    double back = 0.0;
    std::from_chars(s.data(), s.data() + s.size(), back);
    CHECK(back == x);
  }
}

TEST_CASE("provenance line round-trips the config") {
  const auto cfg = preset("desk-b");
  std::ostringstream out;
  csv::write_provenance(out, dump_config(cfg));
  csv::write_potential(out, cfg.potential, std::vector<double>{-1.0, 0.0, 1.0});
  std::istringstream in(out.str());
  std::string first, header;
  std::getline(in, first);
  std::getline(in, header);
  CHECK(first.rfind("# config: ", 0) == 0);
  CHECK(parse_config(csv::read_provenance(first)) == cfg);
  CHECK(header == "x,V");
  CHECK(csv::read_provenance("x,V").empty());
}
