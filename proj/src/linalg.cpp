#include "qbranch/linalg.hpp"

#include <unsupported/Eigen/KroneckerProduct>

namespace qbranch {

namespace {

void require_same_space(const StateVector& phi, const StateVector& psi,
                        const char* op) {
  if (!(phi.space == psi.space)) {
    throw Error(ErrorKind::invalid_argument,
                std::string(op) + ": states live on different spaces (" +
                    std::to_string(phi.space.dim_a) + "x" + std::to_string(phi.space.dim_b) +
                    " vs " + std::to_string(psi.space.dim_a) + "x" +
                    std::to_string(psi.space.dim_b) + ")");
  }
}

}  // namespace

Complex inner_product(const StateVector& phi, const StateVector& psi) {
  require_same_space(phi, psi, "inner_product");
  return phi.amplitudes.dot(psi.amplitudes);
}

StateVector apply_projector_b(const StateVector& psi, const Matrix& p_b) {
  const int db = psi.space.dim_b;
  if (p_b.rows() != db || p_b.cols() != db) {
    throw Error(ErrorKind::invalid_argument,
                "apply_projector_b: operator is " + std::to_string(p_b.rows()) + "x" +
                    std::to_string(p_b.cols()) + " but H_B has dimension " +
                    std::to_string(db));
  }
  // Row a of the amplitude matrix transforms as row -> row * P^T.
  auto m = psi.as_matrix();
  Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> out =
      m * p_b.transpose();
  return StateVector(psi.space, Eigen::Map<const Vector>(out.data(), out.size()));
}

DensityMatrix partial_trace_b(const StateVector& psi) {
  if (psi.squared_norm() == 0.0) {
    throw Error(ErrorKind::invalid_argument, "partial_trace_b: zero state rejected");
  }
  auto m = psi.as_matrix();
  return DensityMatrix(m * m.adjoint());
}

DensityMatrix normalized_reduced_state(const StateVector& psi) {
  const double n2 = psi.squared_norm();
  if (n2 == 0.0) {
    throw Error(ErrorKind::invalid_argument,
                "normalized_reduced_state: zero state rejected");
  }
  auto m = psi.as_matrix();
  return DensityMatrix((m * m.adjoint()) / n2);
}

double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma,
                      const Tolerances& tol) {
  if (rho.dim() != sigma.dim()) {
    throw Error(ErrorKind::invalid_argument,
                "trace_distance: dimension mismatch (" + std::to_string(rho.dim()) +
                    " vs " + std::to_string(sigma.dim()) + ")");
  }
  if (!is_hermitian(rho.entries, tol.hermiticity) ||
      !is_hermitian(sigma.entries, tol.hermiticity)) {
    throw Error(ErrorKind::invalid_argument,
                "trace_distance: inputs must be Hermitian within tolerance");
  }
  Matrix diff = rho.entries - sigma.entries;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(diff, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::numeric, "trace_distance: eigendecomposition failed");
  }
  return 0.5 * solver.eigenvalues().cwiseAbs().sum();
}

Matrix kron(const Matrix& a, const Matrix& b) {
  return Eigen::kroneckerProduct(a, b).eval();
}

bool is_hermitian(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

bool is_projector(const Matrix& p, double tol) {
  if (!is_hermitian(p, tol)) return false;
  return (p * p - p).cwiseAbs().maxCoeff() <= tol;
}

void require_state(const DensityMatrix& rho, const Tolerances& tol,
                   const std::string& context) {
  if (!is_hermitian(rho.entries, tol.hermiticity)) {
    throw Error(ErrorKind::numeric, context + ": not Hermitian within tolerance");
  }
  if (std::abs(rho.trace_real() - 1.0) > tol.density) {
    throw Error(ErrorKind::numeric,
                context + ": trace " + std::to_string(rho.trace_real()) + " is not 1");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(rho.entries, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::numeric, context + ": eigendecomposition failed");
  }
  if (solver.eigenvalues().minCoeff() < -tol.density) {
    throw Error(ErrorKind::numeric,
                context + ": negative eigenvalue " +
                    std::to_string(solver.eigenvalues().minCoeff()));
  }
}

}  // namespace qbranch
