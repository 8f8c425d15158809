#include "cldos/model.hpp"

#include <algorithm>
#include <sstream>

namespace cldos {

double Classicality::ratio() const { return hbar / std::sqrt(mass); }

void Classicality::validate() const {
  if (!(hbar > 0.0)) throw std::invalid_argument("classicality: hbar must be > 0");
  if (!(mass > 0.0)) throw std::invalid_argument("classicality: mass must be > 0");
}

namespace {

// Coefficients (ascending powers) of the polynomial p_n with V^(n)(x) = p_n(x) exp(-eta x^2).
// Recurrence: p_{n+1} = p_n' - 2 eta x p_n.
VectorXd derivative_polynomial(const PotentialSpec& s, int n) {
  VectorXd p(3);
  p << s.a, s.b, s.c;
  for (int k = 0; k < n; ++k) {
    VectorXd q = VectorXd::Zero(p.size() + 1);
    for (Eigen::Index j = 1; j < p.size(); ++j) q(j - 1) += static_cast<double>(j) * p(j);
    for (Eigen::Index j = 0; j < p.size(); ++j) q(j + 1) -= 2.0 * s.eta * p(j);
    p = std::move(q);
  }
  return p;
}

double horner(const VectorXd& p, double x) {
  double r = 0.0;
  for (Eigen::Index j = p.size() - 1; j >= 0; --j) r = r * x + p(j);
  return r;
}

}  // namespace

double PotentialSpec::derivative(int n, double x) const {
  if (n < 0) throw std::invalid_argument("derivative order must be >= 0");
  return horner(derivative_polynomial(*this, n), x) * std::exp(-eta * x * x);
}

Interval PotentialSpec::support(double floor) const {
  const double r = std::sqrt(-std::log(floor) / eta);
  return {-r, r};
}

std::vector<double> PotentialSpec::critical_energies() const {
  std::vector<double> out;
  for (const auto& sp : stationary_points(*this)) out.push_back(sp.E0);
  return out;
}

void PotentialSpec::validate() const {
  if (!(eta > 0.0)) throw std::invalid_argument("potential: eta must be > 0");
  if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c))
    throw std::invalid_argument("potential: coefficients must be finite");
}

std::vector<StationaryPoint> stationary_points(const PotentialSpec& spec, Interval search) {
  spec.validate();
  std::vector<StationaryPoint> out;
  if (spec.is_free()) return out;

  // The Gaussian factor never vanishes, so the roots of V' are those of p_1.
  const VectorXd p1 = derivative_polynomial(spec, 1);
  auto dv = [&](double x) { return horner(p1, x); };

  const int n = kTurningPointGrid;
  const double h = search.length() / (n - 1);
  double scale = 0.0;
  for (int i = 0; i < n; ++i) scale = std::max(scale, std::abs(spec(search.lo + i * h)));
  const double order_floor = 1e-8 * std::max(scale, 1e-300);

  std::vector<double> roots;
  double prev_x = search.lo;
  double prev = dv(prev_x);
  for (int i = 1; i < n; ++i) {
    const double x = i == n - 1 ? search.hi : search.lo + i * h;
    const double cur = dv(x);
    if (cur == 0.0) {
      roots.push_back(x);
    } else if (prev != 0.0 && (prev > 0.0) != (cur > 0.0)) {
      roots.push_back(detail::bisect(dv, prev_x, x));
    }
    prev_x = x;
    prev = cur;
  }

  for (double x0 : roots) {
    if (std::abs(spec.derivative(1, x0)) > 1e-10 * std::max(1.0, scale)) {
      std::ostringstream msg;
      msg << "stationary_points: failed to refine root near x=" << x0
          << " (|V'|=" << std::abs(spec.derivative(1, x0)) << ")";
      throw NumericalError(msg.str());
    }
    int order = 0;
    double d = 0.0;
    for (int k = 2; k <= 8; ++k) {
      d = spec.derivative(k, x0);
      if (std::abs(d) > order_floor) {
        order = k;
        break;
      }
    }
    if (order == 0 || order % 2 != 0) continue;
    out.push_back({x0, spec(x0), order, d < 0.0 ? ExtremumKind::maximum : ExtremumKind::minimum});
  }
  std::sort(out.begin(), out.end(), [](auto& l, auto& r) { return l.x0 < r.x0; });
  return out;
}

std::vector<StationaryPoint> stationary_points(const PotentialSpec& spec) {
  return stationary_points(spec, spec.support(1e-16));
}

}  // namespace cldos
