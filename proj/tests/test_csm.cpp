#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cldos/csm.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss_kronrod.hpp>

using namespace cldos;

namespace {

const PotentialSpec kA{1.0, 0.0, 0.0, 0.1};
const PotentialSpec kC{0.346, -0.173, 0.173, 0.1};
const Classicality kCls{0.1, 1.0};

// Matrix element by brute-force quadrature of phi_m V(e^{i theta} x) phi_n over the box.
Complex element_by_quadrature(const PotentialSpec& s, const BoxBasis& b, double theta, int m, int n) {
  const Complex scale = std::polar(1.0, theta);
  auto f = [&](double x) {
    const double u = x + 0.5 * b.L;
    return (2.0 / b.L) * std::sin(b.kappa(m) * u) * std::sin(b.kappa(n) * u) * s(scale * x);
  };
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  Complex total{0.0, 0.0};
  // Panels of unit length keep every oscillation resolved.
  for (double x = -0.5 * b.L; x < 0.5 * b.L - 1e-12; x += 1.0)
    total += GK::integrate(f, x, std::min(x + 1.0, 0.5 * b.L), 10, 1e-14);
  return total;
}

}  // namespace

TEST_CASE("kinetic diagonal") {
  const BoxBasis box{500.0, 10};
  const auto d0 = kinetic_diagonal(box, kCls, 0.0);
  CHECK(d0(0).real() == doctest::Approx(0.01 * kPi * kPi / (500.0 * 500.0) / 2.0).epsilon(1e-14));
  CHECK(d0(0).real() == doctest::Approx(1.9739e-7).epsilon(1e-4));
  CHECK(d0(0).imag() == 0.0);
  const auto d1 = kinetic_diagonal(box, kCls, 0.5);
  CHECK(std::abs(d1(0) - d0(0) * std::polar(1.0, -1.0)) < 1e-22);
  for (int n = 1; n <= box.N; ++n) CHECK(std::abs(d1(n - 1)) == doctest::Approx(n * n * std::abs(d1(0))));
}

TEST_CASE("potential matrix: special cases and symmetry") {
  const BoxBasis box{60.0, 120};
  CHECK(potential_matrix(PotentialSpec{0.0, 0.0, 0.0, 0.1}, box, 0.4).isZero(0.0));

  const MatrixXcd M0 = potential_matrix(kA, box, 0.0);
  for (int n = 0; n < box.N; ++n) {
    CHECK(M0(n, n).real() > 0.0);
    CHECK(M0(n, n).real() <= 1.0);
    CHECK(std::abs(M0(n, n).imag()) < 1e-15);
  }
  for (double theta : {0.0, 0.25, 0.5}) {
    const MatrixXcd M = potential_matrix(kC, box, theta);
    const double scale = M.cwiseAbs().maxCoeff();
    CHECK((M - M.transpose()).cwiseAbs().maxCoeff() < 1e-12 * scale);
    const MatrixXcd Mm = potential_matrix(kC, box, -theta);
    CHECK((Mm - M.conjugate()).cwiseAbs().maxCoeff() < 1e-14 * scale);
  }
}

TEST_CASE("potential matrix agrees with brute-force quadrature") {
  const BoxBasis box{60.0, 80};
  const std::pair<int, int> picks[] = {{1, 1}, {1, 2}, {3, 7}, {10, 11}, {25, 40}, {80, 79}, {60, 60}};
  for (double theta : {0.0, 0.3}) {
    for (const auto& spec : {kA, kC, PotentialSpec{-0.7, 0.4, 0.25, 0.2}}) {
      const MatrixXcd M = potential_matrix(spec, box, theta);
      for (auto [m, n] : picks) {
        const Complex ref = element_by_quadrature(spec, box, theta, m, n);
        CHECK(std::abs(M(m - 1, n - 1) - ref) < 1e-10);
        CHECK(std::abs(potential_element_quadrature(spec, box, theta, m, n) - ref) < 1e-10);
      }
    }
  }
}

TEST_CASE("potential matrix rejects non-decaying scaling and small boxes") {
  CHECK_THROWS_AS(potential_matrix(kA, BoxBasis{60.0, 10}, 0.8), std::invalid_argument);
  CHECK_THROWS_AS(potential_matrix(kA, BoxBasis{10.0, 10}, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(assemble(std::nullopt, BoxBasis{60.0, 10}, kCls, 0.8), std::invalid_argument);
}

TEST_CASE("assemble") {
  const BoxBasis box{60.0, 100};
  const auto Hf = assemble(std::nullopt, box, kCls, 0.5);
  CHECK(Hf.matrix.isDiagonal(0.0));
  CHECK(!Hf.potential.has_value());

  const auto H0 = assemble(kA, box, kCls, 0.0);
  Eigen::SelfAdjointEigenSolver<MatrixXcd> herm(H0.matrix);
  CHECK(herm.eigenvalues().minCoeff() >= 0.0);

  const auto Hp = assemble(kA, box, kCls, 0.3);
  const auto Hm = assemble(kA, box, kCls, -0.3);
  CHECK((Hp.matrix - Hm.matrix.conjugate()).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("eigensolve: free spectrum is exact") {
  const BoxBasis box{100.0, 300};
  for (double theta : {0.0, 0.25, 0.5}) {
    const auto set = eigensolve(assemble(std::nullopt, box, kCls, theta));
    const auto d = kinetic_diagonal(box, kCls, theta);
    REQUIRE(set.size() == box.N);
    CHECK(!set.interacting);
    for (int n = 0; n < box.N; ++n) CHECK(std::abs(set.eigenvalues(n) - d(n)) <= 1e-12 * std::abs(d(n)));
  }
}

TEST_CASE("eigensolve: Hermitian limit, trace identity and residual") {
  const BoxBasis box{60.0, 200};
  const auto H = assemble(kC, box, kCls, 0.0);
  const auto set = eigensolve(H, {true});
  CHECK(set.interacting);
  Eigen::SelfAdjointEigenSolver<MatrixXcd> herm(H.matrix);
  for (Eigen::Index k = 0; k < set.size(); ++k) {
    CHECK(std::abs(set.eigenvalues(k).imag()) < 1e-10);
    CHECK(set.eigenvalues(k).real() == doctest::Approx(herm.eigenvalues()(k)).epsilon(1e-10).scale(1.0));
  }
  for (double theta : {0.25, 0.5}) {
    const auto Hs = assemble(kC, box, kCls, theta);
    const auto s = eigensolve(Hs, {true});
    const Complex trace = Hs.matrix.trace();
    CHECK(std::abs(s.eigenvalues.sum() - trace) < 1e-9 * std::abs(trace));
  }
}

TEST_CASE("eigensolve: only hbar / sqrt(m) matters") {
  const BoxBasis box{60.0, 150};
  const auto a = eigensolve(assemble(kA, box, Classicality{0.1, 1.0}, 0.5));
  const auto b = eigensolve(assemble(kA, box, Classicality{0.2, 4.0}, 0.5));
  for (Eigen::Index k = 0; k < a.size(); ++k)
    CHECK(std::abs(a.eigenvalues(k) - b.eigenvalues(k)) < 1e-10 * std::max(1.0, std::abs(a.eigenvalues(k))));
}

TEST_CASE("classify") {
  const double theta = 0.5;
  SpectralSet set;
  set.eigenvalues.resize(4);
  set.eigenvalues << std::polar(2.0, -2.0 * theta), Complex(0.7, 0.0), Complex(-0.1, -0.2),
      std::polar(1.0, -2.0 * theta + 0.05);
  const auto labeled = classify(set, theta, default_margin(theta));
  CHECK(labeled.labels[0] == SpectralLabel::background);
  CHECK(labeled.labels[1] == SpectralLabel::resonance);
  CHECK(labeled.labels[2] == SpectralLabel::background);
  CHECK(labeled.labels[3] == SpectralLabel::background);  // within the margin
  CHECK(default_margin(theta) == doctest::Approx(0.1));

  const auto free = classify(eigensolve(assemble(std::nullopt, BoxBasis{60.0, 100}, kCls, theta)), theta,
                             default_margin(theta));
  CHECK(free.resonances().empty());
}

TEST_CASE("resonance ladder of the single barrier") {
  const BoxBasis box{60.0, 500};
  auto count_below_top = [&](double hbar) {
    const auto s = classify(eigensolve(assemble(kA, box, Classicality{hbar, 1.0}, 0.5)), 0.5, 0.1);
    std::vector<Complex> below;
    for (const Complex& e : s.resonances())
      if (e.real() < 1.0) below.push_back(e);
    return below;
  };
  const auto fine = count_below_top(0.1);
  const auto coarse = count_below_top(0.2);
  CHECK(fine.size() > coarse.size());
  REQUIRE(fine.size() >= 3);
  // Widths grow toward the barrier top.
  std::vector<Complex> sorted = fine;
  std::sort(sorted.begin(), sorted.end(), [](Complex a, Complex b) { return a.real() < b.real(); });
  for (std::size_t k = 1; k < sorted.size(); ++k) CHECK(-sorted[k].imag() <= -sorted[k - 1].imag() + 1e-12);
}

TEST_CASE("stabilization scan") {
  const BoxBasis box{60.0, 500};
  const std::vector<BoxPerturbation> thetas{{60.0, 500, 0.45}, {60.0, 500, 0.55}};
  const auto free = stabilization_scan(std::nullopt, kCls, box, 0.5, thetas, 1e-4, 0.1);
  CHECK(free.resonances.empty());

  const auto base = classify(eigensolve(assemble(kA, box, kCls, 0.5)), 0.5, 0.1);
  const auto report = stabilization_scan(base, kA, kCls, thetas, 1e-4);
  REQUIRE(!report.resonances.empty());
  std::vector<SpectralSet> perturbed;
  for (const auto& d : thetas) perturbed.push_back(eigensolve(assemble(kA, BoxBasis{d.L, d.N}, kCls, d.theta)));

  // The narrowest resonance barely moves; background states on the rotated ray do.
  const auto narrowest = std::max_element(report.resonances.begin(), report.resonances.end(),
                                          [](auto& a, auto& b) { return a.value.imag() < b.value.imag(); });
  double smallest_background = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < base.size(); ++k)
    if (base.labels[k] == SpectralLabel::background && base.eigenvalues(k).real() > 0.2)
      smallest_background = std::min(smallest_background, max_drift(base.eigenvalues(k), perturbed));
  CHECK(narrowest->stable);
  CHECK(narrowest->drift < 1e-3 * smallest_background);
  CHECK(report.stable().size() <= report.resonances.size());
}

TEST_CASE("box basis validation") {
  CHECK_THROWS_AS(BoxBasis({0.0, 10}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(BoxBasis({10.0, 0}).validate(), std::invalid_argument);
}
