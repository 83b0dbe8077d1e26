#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "qbranch/linalg.hpp"

using namespace qbranch;

namespace {

StateVector basis_state(const BipartiteSpace& space, int a, int b) {
  Vector amps = Vector::Zero(space.total());
  amps[space.flat(a, b)] = 1.0;
  return StateVector(space, std::move(amps));
}

StateVector bell_state() {
  const BipartiteSpace space(2, 2);
  Vector amps = Vector::Zero(4);
  amps[space.flat(0, 0)] = 1.0 / std::sqrt(2.0);
  amps[space.flat(1, 1)] = 1.0 / std::sqrt(2.0);
  return StateVector(space, std::move(amps));
}

DensityMatrix random_density(std::mt19937_64& gen, int dim) {
  Matrix m(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) m(i, j) = oracle::random_complex(gen);
  }
  Matrix rho = m * m.adjoint();
  return DensityMatrix(rho / rho.trace().real());
}

}  // namespace

TEST_CASE("inner product basics") {
  const BipartiteSpace space(2, 3);
  auto gen = oracle::rng(11);
  const StateVector psi = oracle::random_state(gen, space);
  CHECK(inner_product(psi, psi).real() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(inner_product(psi, psi).imag()) <= 1e-14);

  CHECK(std::abs(inner_product(basis_state(space, 0, 0), basis_state(space, 1, 0))) == 0.0);
}

TEST_CASE("inner product matches the summation oracle") {
  const BipartiteSpace space(3, 4);
  auto gen = oracle::rng(42);
  const StateVector phi = oracle::random_state(gen, space, /*normalize=*/false);
  const StateVector psi = oracle::random_state(gen, space, /*normalize=*/false);
  const Complex expected = oracle::naive_inner_product(phi, psi);
  CHECK(std::abs(inner_product(phi, psi) - expected) <= 1e-13);
  // Conjugate linearity in the first argument.
  const Complex scale(0.3, -0.7);
  const StateVector scaled(space, (scale * phi.amplitudes).eval());
  CHECK(std::abs(inner_product(scaled, psi) - std::conj(scale) * expected) <= 1e-13);
}

TEST_CASE("inner product rejects mismatched spaces") {
  const StateVector a(BipartiteSpace(2, 2), Vector::Ones(4));
  const StateVector b(BipartiteSpace(2, 3), Vector::Ones(6));
  CHECK_THROWS_AS((void)inner_product(a, b), Error);
}

TEST_CASE("projector application") {
  const BipartiteSpace space(2, 2);

  SUBCASE("identity leaves the state unchanged") {
    auto gen = oracle::rng(7);
    const StateVector psi = oracle::random_state(gen, space);
    const StateVector out = apply_projector_b(psi, Matrix::Identity(2, 2));
    CHECK((out.amplitudes - psi.amplitudes).cwiseAbs().maxCoeff() <= 1e-15);
  }

  SUBCASE("orthogonal projector annihilates") {
    Matrix p = Matrix::Zero(2, 2);
    p(1, 1) = 1.0;
    const StateVector out = apply_projector_b(basis_state(space, 0, 0), p);
    CHECK(out.squared_norm() == 0.0);
  }

  SUBCASE("Bell state split") {
    Matrix p = Matrix::Zero(2, 2);
    p(0, 0) = 1.0;
    const StateVector out = apply_projector_b(bell_state(), p);
    CHECK(out.squared_norm() == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(std::abs(out.amplitudes[0] - 1.0 / std::sqrt(2.0)) <= 1e-15);
    CHECK(std::abs(out.amplitudes[1]) == 0.0);
    CHECK(std::abs(out.amplitudes[2]) == 0.0);
    CHECK(std::abs(out.amplitudes[3]) == 0.0);
  }

  SUBCASE("matches the kron-matrix oracle and is idempotent") {
    const BipartiteSpace big(3, 4);
    auto gen = oracle::rng(19);
    const Matrix u = oracle::random_unitary(gen, 4);
    const Matrix p = u.leftCols(2) * u.leftCols(2).adjoint();
    const StateVector psi = oracle::random_state(gen, big);
    const StateVector once = apply_projector_b(psi, p);
    const StateVector expected = oracle::naive_apply_projector_b(psi, p);
    CHECK((once.amplitudes - expected.amplitudes).cwiseAbs().maxCoeff() <= 1e-13);
    const StateVector twice = apply_projector_b(once, p);
    CHECK((twice.amplitudes - once.amplitudes).cwiseAbs().maxCoeff() <= 1e-12);
  }

  SUBCASE("dimension mismatch is rejected") {
    CHECK_THROWS_AS((void)apply_projector_b(bell_state(), Matrix::Identity(3, 3)), Error);
  }
}

TEST_CASE("partial trace") {
  SUBCASE("product state reduces to a pure state") {
    const BipartiteSpace space(2, 3);
    auto gen = oracle::rng(3);
    Vector a = oracle::random_vector(gen, 2);
    a /= a.norm();
    Vector b = oracle::random_vector(gen, 3);
    b /= b.norm();
    Vector amps(space.total());
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 3; ++j) amps[space.flat(i, j)] = a[i] * b[j];
    }
    const DensityMatrix rho = partial_trace_b(StateVector(space, std::move(amps)));
    const Matrix expected = a * a.adjoint();
    CHECK((rho.entries - expected).cwiseAbs().maxCoeff() <= 1e-14);
  }

  SUBCASE("Bell state reduces to the maximally mixed state") {
    const DensityMatrix rho = partial_trace_b(bell_state());
    CHECK((rho.entries - 0.5 * Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-15);
  }

  SUBCASE("matches the double-index oracle, trace equals squared norm") {
    const BipartiteSpace space(4, 3);
    auto gen = oracle::rng(23);
    const StateVector psi = oracle::random_state(gen, space, /*normalize=*/false);
    const DensityMatrix rho = partial_trace_b(psi);
    CHECK((rho.entries - oracle::naive_partial_trace_b(psi)).cwiseAbs().maxCoeff() <= 1e-13);
    CHECK(rho.trace_real() == doctest::Approx(psi.squared_norm()).epsilon(1e-13));
  }

  SUBCASE("zero state is rejected") {
    const StateVector zero(BipartiteSpace(2, 2), Vector::Zero(4));
    CHECK_THROWS_AS((void)partial_trace_b(zero), Error);
  }

  SUBCASE("normalized input gives a valid unit-trace state") {
    const BipartiteSpace space(3, 5);
    auto gen = oracle::rng(31);
    const DensityMatrix rho = partial_trace_b(oracle::random_state(gen, space));
    CHECK(std::abs(rho.trace_real() - 1.0) <= 1e-12);
    CHECK_NOTHROW(require_state(rho));
  }
}

TEST_CASE("trace distance") {
  SUBCASE("coincident states") {
    auto gen = oracle::rng(5);
    const DensityMatrix rho = random_density(gen, 3);
    CHECK(trace_distance(rho, rho) == doctest::Approx(0.0).epsilon(1e-15));
  }

  SUBCASE("orthogonal pure states") {
    Matrix p0 = Matrix::Zero(2, 2), p1 = Matrix::Zero(2, 2);
    p0(0, 0) = 1.0;
    p1(1, 1) = 1.0;
    CHECK(trace_distance(DensityMatrix(p0), DensityMatrix(p1)) ==
          doctest::Approx(1.0).epsilon(1e-14));
  }

  SUBCASE("diagonal case") {
    Matrix a = Matrix::Zero(2, 2), b = Matrix::Zero(2, 2);
    a(0, 0) = 0.75;
    a(1, 1) = 0.25;
    b(0, 0) = 0.5;
    b(1, 1) = 0.5;
    // Eigenvalues of the difference are +/- 0.25, so the distance is 0.25.
    CHECK(trace_distance(DensityMatrix(a), DensityMatrix(b)) ==
          doctest::Approx(0.25).epsilon(1e-14));
  }

  SUBCASE("rejects non-Hermitian input") {
    Matrix bad = Matrix::Zero(2, 2);
    bad(0, 1) = 1.0;
    auto gen = oracle::rng(6);
    CHECK_THROWS_AS((void)trace_distance(DensityMatrix(bad), random_density(gen, 2)), Error);
  }

  SUBCASE("symmetry and triangle inequality on seeded triples") {
    auto gen = oracle::rng(97);
    for (int trial = 0; trial < 25; ++trial) {
      const DensityMatrix a = random_density(gen, 4);
      const DensityMatrix b = random_density(gen, 4);
      const DensityMatrix c = random_density(gen, 4);
      const double ab = trace_distance(a, b);
      const double bc = trace_distance(b, c);
      const double ac = trace_distance(a, c);
      CHECK(ab == doctest::Approx(trace_distance(b, a)).epsilon(1e-13));
      CHECK(ac <= ab + bc + 1e-10);
      CHECK(ab >= 0.0);
      CHECK(ab <= 1.0 + 1e-12);
    }
  }
}

TEST_CASE("projector family completeness and Pythagoras") {
  const BipartiteSpace space(3, 5);
  auto gen = oracle::rng(111);
  const Matrix u = oracle::random_unitary(gen, 5);
  const StateVector psi = oracle::random_state(gen, space);

  Vector reconstructed = Vector::Zero(space.total());
  double norm_sum = 0.0;
  for (int i = 0; i < 5; ++i) {
    const Matrix p = u.col(i) * u.col(i).adjoint();
    const StateVector component = apply_projector_b(psi, p);
    reconstructed += component.amplitudes;
    norm_sum += component.squared_norm();
  }
  CHECK((reconstructed - psi.amplitudes).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(norm_sum == doctest::Approx(psi.squared_norm()).epsilon(1e-10));
}
