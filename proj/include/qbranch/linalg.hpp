#pragma once

#include "qbranch/types.hpp"

namespace qbranch {

// <phi|psi>, conjugate-linear in the first argument.
Complex inner_product(const StateVector& phi, const StateVector& psi);

// (I (x) P) psi for an operator P on H_B.
StateVector apply_projector_b(const StateVector& psi, const Matrix& p_b);

// Reduced operator on H_A: rho(a,a') = sum_b psi[a*d_B+b] conj(psi[a'*d_B+b]).
// Trace equals ||psi||^2; rejects the zero vector.
DensityMatrix partial_trace_b(const StateVector& psi);

// partial_trace_b scaled to unit trace.
DensityMatrix normalized_reduced_state(const StateVector& psi);

// (1/2) sum |eigenvalue_i(rho - sigma)|. Inputs must be Hermitian within
// tol.hermiticity.
double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma,
                      const Tolerances& tol = {});

Matrix kron(const Matrix& a, const Matrix& b);

bool is_hermitian(const Matrix& m, double tol);
bool is_projector(const Matrix& p, double tol);

// Hermitian / PSD / unit-trace check for matrices returned as states; throws
// on violation.
void require_state(const DensityMatrix& rho, const Tolerances& tol = {},
                   const std::string& context = "DensityMatrix");

}  // namespace qbranch
