#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qbranch {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

// Row-major map of a flat amplitude vector as a dim_a x dim_b matrix.
using AmplitudeView =
    Eigen::Map<const Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

enum class ErrorKind {
  invalid_argument,  // rejected input (dimension mismatch, bad parameters)
  numeric,           // numerical failure (solver breakdown, degenerate weights)
  config,            // malformed or inconsistent run configuration
  io                 // file-system failure
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Numerical tolerances used across the library. Every invariant check takes
// its threshold from one of these fields so that a single record controls
// the whole pipeline.
struct Tolerances {
  double hermiticity = 1e-10;        // max entry-wise |M - M†|
  double projector = 1e-10;          // idempotence, orthogonality, completeness
  double unit_norm = 1e-12;          // | ||psi||^2 - 1 | for normalized states
  double density = 1e-10;            // trace / eigenvalue checks for states
  double unitarity = 1e-10;          // max entry of |U†U - I|
  double branch_floor = 1e-12;       // squared-norm floor for kept components
  double schmidt_degeneracy = 1e-8;  // coefficient gap that merges groups
  double schmidt_zero = 1e-12;       // coefficients below this are dropped
  double matching_ambiguity = 1e-9;  // overlap gap flagged during matching
  double sampling_norm = 1e-6;       // allowed |sum p - 1| before sampling
};

// Dimensions of the preferred tensor factorization H = H_A (x) H_B.
// Basis vector |a> (x) |b> maps to flat index a*dim_b + b; every module
// shares this convention.
struct BipartiteSpace {
  int dim_a = 1;
  int dim_b = 1;

  BipartiteSpace() = default;
  BipartiteSpace(int da, int db) : dim_a(da), dim_b(db) {
    if (da < 1 || db < 1) {
      throw Error(ErrorKind::invalid_argument,
                  "BipartiteSpace: dimensions must be >= 1, got (" +
                      std::to_string(da) + ", " + std::to_string(db) + ")");
    }
  }

  int total() const { return dim_a * dim_b; }
  int flat(int a, int b) const { return a * dim_b + b; }

  friend bool operator==(const BipartiteSpace&, const BipartiteSpace&) = default;
};

// Complex amplitude vector on the full space. Branch components are stored
// as unnormalized StateVectors; their squared norms are probabilities.
struct StateVector {
  BipartiteSpace space;
  Vector amplitudes;

  StateVector() = default;
  StateVector(BipartiteSpace s, Vector a) : space(s), amplitudes(std::move(a)) {
    if (amplitudes.size() != space.total()) {
      throw Error(ErrorKind::invalid_argument,
                  "StateVector: amplitude length " + std::to_string(amplitudes.size()) +
                      " does not match space dimension " + std::to_string(space.total()));
    }
  }

  double squared_norm() const { return amplitudes.squaredNorm(); }
  bool is_normalized(double tol = 1e-12) const {
    return std::abs(squared_norm() - 1.0) <= tol;
  }

  AmplitudeView as_matrix() const {
    return AmplitudeView(amplitudes.data(), space.dim_a, space.dim_b);
  }
};

// Hermitian positive-semidefinite operator; instances returned as states
// additionally carry unit trace (see require_state in linalg.hpp).
struct DensityMatrix {
  Matrix entries;

  DensityMatrix() = default;
  explicit DensityMatrix(Matrix m) : entries(std::move(m)) {
    if (entries.rows() != entries.cols()) {
      throw Error(ErrorKind::invalid_argument, "DensityMatrix: matrix must be square");
    }
  }

  int dim() const { return static_cast<int>(entries.rows()); }
  double trace_real() const { return entries.trace().real(); }
};

}  // namespace qbranch
