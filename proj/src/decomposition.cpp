#include "qbranch/decomposition.hpp"

#include <cmath>
#include <numbers>

#include "qbranch/linalg.hpp"

namespace qbranch {

std::string to_string(DecompKind kind) {
  switch (kind) {
    case DecompKind::basis: return "basis";
    case DecompKind::fourier: return "fourier";
    case DecompKind::schmidt: return "schmidt";
  }
  return "unknown";
}

void ProjectiveDecomposition::require_valid(const Tolerances& tol) const {
  const int db = space.dim_b;
  Matrix sum = Matrix::Zero(db, db);
  for (std::size_t i = 0; i < projectors.size(); ++i) {
    const Matrix& p = projectors[i].op;
    if (p.rows() != db || p.cols() != db) {
      throw Error(ErrorKind::invalid_argument,
                  "ProjectiveDecomposition: projector '" + projectors[i].label +
                      "' has wrong dimension");
    }
    if (!is_projector(p, tol.projector)) {
      throw Error(ErrorKind::invalid_argument,
                  "ProjectiveDecomposition: '" + projectors[i].label +
                      "' is not a projector within tolerance");
    }
    for (std::size_t j = i + 1; j < projectors.size(); ++j) {
      if ((p * projectors[j].op).cwiseAbs().maxCoeff() > tol.projector) {
        throw Error(ErrorKind::invalid_argument,
                    "ProjectiveDecomposition: '" + projectors[i].label + "' and '" +
                        projectors[j].label + "' are not orthogonal");
      }
      if (projectors[i].label == projectors[j].label) {
        throw Error(ErrorKind::invalid_argument,
                    "ProjectiveDecomposition: duplicate label '" + projectors[i].label + "'");
      }
    }
    sum += p;
  }
  if ((sum - Matrix::Identity(db, db)).cwiseAbs().maxCoeff() > tol.projector) {
    throw Error(ErrorKind::invalid_argument,
                "ProjectiveDecomposition: projectors do not sum to the identity");
  }
}

ProjectiveDecomposition basis_decomposition(const BipartiteSpace& space, const Matrix& basis,
                                            std::vector<std::string> labels,
                                            const Tolerances& tol) {
  const int db = space.dim_b;
  if (basis.rows() != db || basis.cols() != db) {
    throw Error(ErrorKind::invalid_argument,
                "basis_decomposition: expected a " + std::to_string(db) + "x" +
                    std::to_string(db) + " basis matrix");
  }
  if ((basis.adjoint() * basis - Matrix::Identity(db, db)).cwiseAbs().maxCoeff() >
      tol.projector) {
    throw Error(ErrorKind::invalid_argument,
                "basis_decomposition: columns are not orthonormal within tolerance");
  }
  if (!labels.empty() && static_cast<int>(labels.size()) != db) {
    throw Error(ErrorKind::invalid_argument,
                "basis_decomposition: expected " + std::to_string(db) + " labels, got " +
                    std::to_string(labels.size()));
  }
  ProjectiveDecomposition dec{space, DecompKind::basis, {}};
  dec.projectors.reserve(db);
  for (int i = 0; i < db; ++i) {
    std::string label = labels.empty() ? std::to_string(i) : labels[i];
    dec.projectors.push_back(
        {std::move(label), basis.col(i) * basis.col(i).adjoint()});
  }
  return dec;
}

ProjectiveDecomposition computational_decomposition(const BipartiteSpace& space) {
  return basis_decomposition(space, Matrix::Identity(space.dim_b, space.dim_b));
}

ProjectiveDecomposition fourier_decomposition(const BipartiteSpace& space) {
  const int db = space.dim_b;
  Matrix basis(db, db);
  const double norm = 1.0 / std::sqrt(static_cast<double>(db));
  for (int m = 0; m < db; ++m) {
    for (int b = 0; b < db; ++b) {
      const double angle = 2.0 * std::numbers::pi * m * b / db;
      basis(b, m) = norm * Complex(std::cos(angle), std::sin(angle));
    }
  }
  auto dec = basis_decomposition(space, basis);
  dec.kind = DecompKind::fourier;
  return dec;
}

SchmidtData schmidt(const StateVector& psi, double degeneracy_tol, const Tolerances& tol) {
  if (psi.squared_norm() == 0.0) {
    throw Error(ErrorKind::invalid_argument, "schmidt: zero state rejected");
  }
  // psi[a,b] = sum_j U(a,j) s_j conj(V(b,j)), so e_j = U.col(j) and
  // f_j = conj(V.col(j)).
  Eigen::JacobiSVD<Matrix> svd(psi.as_matrix(), Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& singular = svd.singularValues();

  int kept = 0;
  while (kept < singular.size() && singular[kept] > tol.schmidt_zero) ++kept;

  SchmidtData data;
  data.coefficients.assign(singular.data(), singular.data() + kept);
  data.vectors_a = svd.matrixU().leftCols(kept);
  data.vectors_b = svd.matrixV().leftCols(kept).conjugate();

  // Chain consecutive coefficients whose gap is <= degeneracy_tol.
  std::vector<int> group;
  for (int j = 0; j < kept; ++j) {
    if (!group.empty() &&
        data.coefficients[group.back()] - data.coefficients[j] > degeneracy_tol) {
      data.groups.push_back(std::move(group));
      group.clear();
    }
    group.push_back(j);
  }
  if (!group.empty()) data.groups.push_back(std::move(group));
  return data;
}

ProjectiveDecomposition schmidt_projectors(const StateVector& psi, double degeneracy_tol,
                                           const Tolerances& tol) {
  SchmidtData data = schmidt(psi, degeneracy_tol, tol);
  const int db = psi.space.dim_b;
  ProjectiveDecomposition dec{psi.space, DecompKind::schmidt, {}};
  Matrix sum = Matrix::Zero(db, db);
  for (std::size_t g = 0; g < data.groups.size(); ++g) {
    Matrix p = Matrix::Zero(db, db);
    for (int j : data.groups[g]) {
      p += data.vectors_b.col(j) * data.vectors_b.col(j).adjoint();
    }
    sum += p;
    dec.projectors.push_back({"g" + std::to_string(g), std::move(p)});
  }
  Matrix complement = Matrix::Identity(db, db) - sum;
  if (complement.cwiseAbs().maxCoeff() > tol.projector) {
    dec.projectors.push_back({"null", std::move(complement)});
  }
  return dec;
}

ProjectiveDecomposition build_decomposition(const DecompositionSpec& spec,
                                            const BipartiteSpace& space,
                                            const StateVector& psi_at_t,
                                            const Tolerances& tol) {
  switch (spec.kind) {
    case DecompKind::basis: {
      const Matrix basis =
          spec.basis ? *spec.basis : Matrix::Identity(space.dim_b, space.dim_b);
      return basis_decomposition(space, basis, spec.labels, tol);
    }
    case DecompKind::fourier:
      return fourier_decomposition(space);
    case DecompKind::schmidt:
      return schmidt_projectors(psi_at_t, spec.degeneracy_tol, tol);
  }
  throw Error(ErrorKind::invalid_argument, "build_decomposition: unknown kind");
}

}  // namespace qbranch
