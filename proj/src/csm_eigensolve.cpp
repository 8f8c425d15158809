#include "cldos/csm.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <sstream>

namespace cldos {

SpectralSet eigensolve(const ScaledHamiltonian& H, EigensolveOptions opts) {
  if (H.matrix.rows() < 1) throw std::invalid_argument("eigensolve: empty matrix");
  Eigen::ComplexEigenSolver<MatrixXcd> es(H.matrix, opts.compute_vectors);
  const double norm = H.matrix.norm();
  if (es.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "eigensolve: no convergence (N=" << H.matrix.rows() << ", theta=" << H.theta
        << ", ||H||_F=" << norm << ")";
    throw NumericalError(msg.str());
  }
  if (opts.compute_vectors) {
    const Eigen::Index k = H.matrix.rows() / 2;
    const VectorXcd v = es.eigenvectors().col(k);
    const double r = (H.matrix * v - es.eigenvalues()(k) * v).norm() / v.norm();
    if (r > 1e-8 * norm) {
      std::ostringstream msg;
      msg << "eigensolve: residual " << r << " exceeds 1e-8 ||H|| = " << 1e-8 * norm;
      throw NumericalError(msg.str());
    }
  }

  std::vector<Complex> ev(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(ev.begin(), ev.end(), [](const Complex& l, const Complex& r) {
    return l.real() != r.real() ? l.real() < r.real() : l.imag() < r.imag();
  });

  SpectralSet out;
  out.eigenvalues = Eigen::Map<const VectorXcd>(ev.data(), Eigen::Index(ev.size()));
  out.theta = H.theta;
  out.basis = H.basis;
  out.interacting = H.potential.has_value() && !H.potential->is_free();
  return out;
}

}  // namespace cldos
