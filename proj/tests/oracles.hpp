// Brute-force reference implementations used as independent oracles. These
// deliberately avoid the library's Eigen-based code paths: plain loops for
// sums and products, a Taylor-series exponential for evolution.
#pragma once

#include <complex>
#include <random>
#include <vector>

#include "qbranch/types.hpp"

namespace oracle {

using qbranch::Complex;
using qbranch::Matrix;
using qbranch::StateVector;
using qbranch::Vector;

inline Complex naive_inner_product(const StateVector& phi, const StateVector& psi) {
  Complex sum = 0.0;
  const int da = phi.space.dim_a;
  const int db = phi.space.dim_b;
  for (int a = 0; a < da; ++a) {
    for (int b = 0; b < db; ++b) {
      const int idx = a * db + b;
      sum += std::conj(phi.amplitudes[idx]) * psi.amplitudes[idx];
    }
  }
  return sum;
}

inline Matrix naive_kron(const Matrix& a, const Matrix& b) {
  Matrix out = Matrix::Zero(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < a.cols(); ++j) {
      for (int k = 0; k < b.rows(); ++k) {
        for (int l = 0; l < b.cols(); ++l) {
          out(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
        }
      }
    }
  }
  return out;
}

inline Vector naive_matvec(const Matrix& m, const Vector& v) {
  Vector out = Vector::Zero(m.rows());
  for (int i = 0; i < m.rows(); ++i) {
    Complex sum = 0.0;
    for (int j = 0; j < m.cols(); ++j) sum += m(i, j) * v[j];
    out[i] = sum;
  }
  return out;
}

inline StateVector naive_apply_projector_b(const StateVector& psi, const Matrix& p_b) {
  const int da = psi.space.dim_a;
  const Matrix full = naive_kron(Matrix::Identity(da, da), p_b);
  return StateVector(psi.space, naive_matvec(full, psi.amplitudes));
}

inline Matrix naive_partial_trace_b(const StateVector& psi) {
  const int da = psi.space.dim_a;
  const int db = psi.space.dim_b;
  Matrix rho = Matrix::Zero(da, da);
  for (int a = 0; a < da; ++a) {
    for (int a2 = 0; a2 < da; ++a2) {
      Complex sum = 0.0;
      for (int b = 0; b < db; ++b) {
        sum += psi.amplitudes[a * db + b] * std::conj(psi.amplitudes[a2 * db + b]);
      }
      rho(a, a2) = sum;
    }
  }
  return rho;
}

// exp(M) by scaling-and-squaring with a Taylor series; independent of any
// eigendecomposition.
inline Matrix expm_taylor(const Matrix& m) {
  const int dim = static_cast<int>(m.rows());
  int squarings = 0;
  double norm = m.cwiseAbs().sum();
  while (norm > 0.5) {
    norm /= 2.0;
    ++squarings;
  }
  const Matrix scaled = m / std::pow(2.0, squarings);
  Matrix result = Matrix::Identity(dim, dim);
  Matrix term = Matrix::Identity(dim, dim);
  for (int k = 1; k < 64; ++k) {
    term = (term * scaled) / static_cast<double>(k);
    result += term;
    if (term.cwiseAbs().maxCoeff() < 1e-20) break;
  }
  for (int s = 0; s < squarings; ++s) result = result * result;
  return result;
}

// exp(-i H t).
inline Matrix naive_propagator(const Matrix& hamiltonian, double dt) {
  return expm_taylor(Complex(0.0, -dt) * hamiltonian);
}

// Ordered product of segment exponentials for a piecewise-constant schedule
// given as (H, duration) pairs covering [0, sum durations], evaluated between
// two times.
struct NaiveSegment {
  Matrix hamiltonian;
  double duration;
};

inline Matrix naive_schedule_propagator(const std::vector<NaiveSegment>& segments,
                                        double t1, double t2) {
  const int dim = static_cast<int>(segments.front().hamiltonian.rows());
  Matrix u = Matrix::Identity(dim, dim);
  double start = 0.0;
  for (const NaiveSegment& seg : segments) {
    const double end = start + seg.duration;
    const double lo = std::max(t1, start);
    const double hi = std::min(t2, end);
    if (hi > lo) u = naive_propagator(seg.hamiltonian, hi - lo) * u;
    start = end;
  }
  return u;
}

// Deterministic random test data.
inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline Complex random_complex(std::mt19937_64& gen) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  const double re = dist(gen);
  const double im = dist(gen);
  return Complex(re, im);
}

inline Vector random_vector(std::mt19937_64& gen, int dim) {
  Vector v(dim);
  for (int i = 0; i < dim; ++i) v[i] = random_complex(gen);
  return v;
}

inline StateVector random_state(std::mt19937_64& gen, const qbranch::BipartiteSpace& space,
                                bool normalize = true) {
  Vector v = random_vector(gen, space.total());
  if (normalize) v /= v.norm();
  return StateVector(space, std::move(v));
}

inline Matrix random_hermitian(std::mt19937_64& gen, int dim, double scale = 1.0) {
  Matrix m(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) m(i, j) = random_complex(gen);
  }
  return scale * 0.5 * (m + m.adjoint()).eval();
}

// Random unitary from the QR decomposition of a random matrix.
inline Matrix random_unitary(std::mt19937_64& gen, int dim) {
  Matrix m(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) m(i, j) = random_complex(gen);
  }
  Eigen::HouseholderQR<Matrix> qr(m);
  return qr.householderQ();
}

}  // namespace oracle
