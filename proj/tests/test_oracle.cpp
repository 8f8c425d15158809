#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cldos/csm.hpp"
#include "cldos/oracle.hpp"

#include <random>

using namespace cldos;

namespace {

const PotentialSpec kA{1.0, 0.0, 0.0, 0.1};
const PotentialSpec kB{1.0, 0.0, 0.1, 0.1};
const PotentialSpec kC{0.346, -0.173, 0.173, 0.1};
const Classicality kCls{0.1, 1.0};
const Classicality kClsC{0.058, 1.0};
constexpr double kXL = -50.0, kXR = 50.0;

// V(-x): incidence from the right of the original potential.
struct Mirrored {
  PotentialSpec spec;
  double operator()(double x) const { return spec(-x); }
  Interval support() const {
    const Interval s = spec.support();
    return {-s.hi, -s.lo};
  }
  std::vector<double> breakpoints() const { return {}; }
  std::vector<double> critical_energies() const { return spec.critical_energies(); }
};

Complex rectangular_transmission(double V0, double w, double E, const Classicality& cls) {
  const double k = std::sqrt(2.0 * cls.mass * E) / cls.hbar;
  const Complex q = std::sqrt(Complex(2.0 * cls.mass * (E - V0), 0.0)) / cls.hbar;
  const Complex den = std::cos(q * w) - Complex(0.0, 1.0) * (q * q + k * k) / (2.0 * k * q) * std::sin(q * w);
  return std::polar(1.0, -k * w) / den;
}

std::vector<double> lorentzian(const std::vector<double>& E, double E0, double G, double area, double bg) {
  std::vector<double> y;
  for (double e : E) y.push_back(bg + area / kPi * 0.5 * G / ((e - E0) * (e - E0) + 0.25 * G * G));
  return y;
}

}  // namespace

TEST_CASE("free potential transmits exactly") {
  const PotentialSpec none{0.0, 0.0, 0.0, 0.1};
  for (double E : {0.1, 1.0, 5.0}) {
    const auto p = solve_scatter(none, kCls, E, kXL, kXR);
    CHECK(p.T == Complex(1.0, 0.0));
    CHECK(p.R == Complex(0.0, 0.0));
  }
  const auto curve = oracle_density(none, kCls, std::vector<double>{0.2, 0.3, 0.4}, kXL, kXR);
  for (const Complex& d : curve.density) CHECK(d == Complex(0.0, 0.0));
}

TEST_CASE("rectangular barrier against the closed form") {
  const RectangularBarrier barrier{1.0, 2.0, 0.0};
  for (double E : {0.25, 0.5, 0.9, 1.5, 3.0}) {
    const auto p = solve_scatter(barrier, kCls, E, -5.0, 5.0);
    const Complex ref = rectangular_transmission(1.0, 2.0, E, kCls);
    INFO("E = " << E);
    CHECK(std::abs(p.T - ref) < 1e-8 * std::abs(ref));
  }
}

TEST_CASE("high energies are transparent") {
  const auto p = solve_scatter(kA, kCls, 20.0, kXL, kXR);
  CHECK(std::abs(p.T) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("unitarity over random energies") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> uE(0.1, 3.0);
  for (const auto* s : {&kA, &kB, &kC}) {
    for (int i = 0; i < 34; ++i) {
      const double E = uE(rng);
      const auto p = solve_scatter(*s, s == &kC ? kClsC : kCls, E, kXL, kXR);
      CHECK(std::abs(std::norm(p.T) + std::norm(p.R) - 1.0) < 1e-8);
      CHECK(std::abs(p.T) <= 1.0 + 1e-8);
    }
  }
}

TEST_CASE("deep tunneling keeps ln|T| past underflow") {
  const PotentialSpec tall{30.0, 0.0, 0.0, 0.1};
  const auto p = solve_scatter(tall, Classicality{0.02, 1.0}, 0.5, kXL, kXR);
  CHECK(std::isfinite(p.log_T.real()));
  CHECK(p.log_T.real() < -745.0);  // |T| itself underflows to zero
  CHECK(std::abs(p.R) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("resolution convergence") {
  const OracleResolution base{};
  const OracleResolution fine{2.0 * base.slices_per_wavelength, 2 * base.min_slices};
  for (double E : {0.3, 0.7, 1.2, 2.5}) {
    for (const auto* s : {&kA, &kC}) {
      const auto a = solve_scatter(*s, kCls, E, kXL, kXR, base);
      const auto b = solve_scatter(*s, kCls, E, kXL, kXR, fine);
      CHECK(std::abs(std::abs(a.T) - std::abs(b.T)) < 1e-8 * std::max(std::abs(b.T), 1e-300));
      CHECK(std::abs(a.log_T - b.log_T) < 1e-8);
    }
  }
}

TEST_CASE("reciprocity: left and right incidence transmit alike") {
  for (double E : {0.2, 0.45, 0.8, 1.7}) {
    const auto left = solve_scatter(kC, kCls, E, kXL, kXR);
    const auto right = solve_scatter(Mirrored{kC}, kCls, E, kXL, kXR);
    CHECK(std::abs(left.log_T.real() - right.log_T.real()) < 1e-10);
    // Reflection differs in phase only.
    CHECK(std::abs(std::abs(left.R) - std::abs(right.R)) < 1e-10);
  }
}

TEST_CASE("below the barrier ln|T| falls with energy") {
  std::vector<double> grid;
  for (int i = 0; i <= 180; ++i) grid.push_back(0.1 + 0.005 * i);
  double previous = -std::numeric_limits<double>::infinity();
  for (double E : grid) {
    const double lnT = solve_scatter(kA, kCls, E, kXL, kXR).log_T.real();
    CHECK(lnT > previous);
    previous = lnT;
  }
}

TEST_CASE("oracle_density: derivative and phase continuity") {
  std::vector<double> grid;
  for (int i = 0; i <= 200; ++i) grid.push_back(0.6 + 0.002 * i);
  const auto curve = oracle_density(kA, kCls, grid, kXL, kXR);
  REQUIRE(curve.points.size() == grid.size());
  CHECK(curve.sharp.empty());
  for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
    const Complex d = (curve.points[i + 1].Phi - curve.points[i - 1].Phi) / (kPi * (grid[i + 1] - grid[i - 1]));
    CHECK(curve.density[i] == d);
    // Im part is -(1/pi) d ln|T| / dE.
    const double dlnT = (curve.points[i + 1].log_T.real() - curve.points[i - 1].log_T.real()) / (grid[i + 1] - grid[i - 1]);
    CHECK(curve.density[i].imag() == doctest::Approx(-dlnT / kPi).epsilon(1e-12));
  }
}

TEST_CASE("oracle_density refines narrow resonances and isolates unresolvable ones") {
  // The well of potential (c) holds quasi-bound states far narrower than any grid.
  std::vector<double> grid;
  for (int i = 0; i <= 40; ++i) grid.push_back(0.30 + 0.001 * i);
  OracleResolution res;
  const auto curve = oracle_density(kC, kClsC, grid, kXL, kXR, res);
  CHECK(curve.points.size() > grid.size());
  // The two lowest well states, at 0.30863 and 0.33812.
  REQUIRE(curve.sharp.size() == 2);
  CHECK(curve.sharp[0] == doctest::Approx(0.30863).epsilon(1e-4));
  CHECK(curve.sharp[1] == doctest::Approx(0.33812).epsilon(1e-4));
  for (double step : curve.sharp_steps) CHECK(std::abs(std::abs(step) - kPi) < 1e-2);
  for (const Complex& d : curve.density) CHECK(std::isfinite(d.real()));
  // Every requested energy is still present.
  for (double E : grid) {
    const bool present = std::any_of(curve.points.begin(), curve.points.end(), [&](auto& p) { return p.E == E; });
    CHECK(present);
  }

  res.refine_depth = 0;
  CHECK_THROWS_AS(oracle_density(kC, kClsC, grid, kXL, kXR, res), NumericalError);
}

TEST_CASE("finish_oracle_curve rejects unresolved phase steps") {
  std::vector<ScatterPoint> pts(3);
  for (int i = 0; i < 3; ++i) pts[i].E = 0.1 * (i + 1);
  pts[1].Phi = Complex(2.0, 0.0);
  CHECK_THROWS_AS(finish_oracle_curve(pts), NumericalError);
  const std::size_t allowed[] = {0};
  pts[2].Phi = Complex(2.1, 0.0);
  const auto curve = finish_oracle_curve(pts, allowed);
  CHECK(curve.sharp.size() == 1);
  CHECK(curve.density[2].real() == doctest::Approx(0.1 / (kPi * 0.1)));
}

TEST_CASE("resonance_extract on synthetic Lorentzians") {
  std::vector<double> E;
  for (int i = 0; i <= 2000; ++i) E.push_back(0.5 + 0.0005 * i);

  const auto one = resonance_extract(E, lorentzian(E, 0.83, 0.02, 1.0, 0.3));
  REQUIRE(one.size() == 1);
  CHECK(one[0].E == doctest::Approx(0.83).epsilon(1e-6));
  CHECK(one[0].Gamma == doctest::Approx(0.02).epsilon(1e-6));
  CHECK(one[0].area == doctest::Approx(1.0).epsilon(1e-6));

  auto two = lorentzian(E, 0.7, 0.01, 1.0, 0.0);
  const auto second = lorentzian(E, 1.2, 0.03, 1.0, 0.0);
  for (std::size_t i = 0; i < E.size(); ++i) two[i] += second[i];
  const auto both = resonance_extract(E, two);
  REQUIRE(both.size() == 2);
  CHECK(both[0].E == doctest::Approx(0.7).epsilon(1e-6));
  CHECK(both[0].Gamma == doctest::Approx(0.01).epsilon(1e-5));
  CHECK(both[1].E == doctest::Approx(1.2).epsilon(1e-6));
  CHECK(both[1].Gamma == doctest::Approx(0.03).epsilon(1e-5));

  CHECK(resonance_extract(E, std::vector<double>(E.size(), 2.0)).empty());
}

TEST_CASE("isolated resonance of potential (c): oracle width matches CSM") {
  const BoxBasis box{60.0, 800};
  const auto spectrum = classify(eigensolve(assemble(kC, box, kClsC, 0.25)), 0.25, default_margin(0.25));
  Complex target{0.0, 0.0};
  for (const Complex& e : spectrum.resonances())
    if (std::abs(e.real() - 0.5767) < 0.005) target = e;
  REQUIRE(target.real() > 0.0);
  const double Ek = target.real(), Gk = -2.0 * target.imag();

  std::vector<double> grid;
  for (int i = 0; i <= 400; ++i) grid.push_back(Ek - 3.0 * Gk + 6.0 * Gk * i / 400.0);
  const auto peaks = resonance_extract(oracle_density(kC, kClsC, grid, kXL, kXR), {.min_prominence = 0.5});
  REQUIRE(!peaks.empty());
  const auto nearest = *std::min_element(peaks.begin(), peaks.end(), [&](auto& x, auto& y) {
    return std::abs(x.E - Ek) < std::abs(y.E - Ek);
  });
  INFO("CSM " << Ek << " / " << Gk << ", oracle " << nearest.E << " / " << nearest.Gamma);
  CHECK(std::abs(nearest.E - Ek) < 0.1 * Gk);
  CHECK(nearest.Gamma == doctest::Approx(Gk).epsilon(0.10));
}
