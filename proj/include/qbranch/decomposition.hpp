#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qbranch/types.hpp"

namespace qbranch {

enum class DecompKind { basis, fourier, schmidt };

std::string to_string(DecompKind kind);

struct LabeledProjector {
  std::string label;
  Matrix op;  // acts on H_B
};

// Complete family of mutually orthogonal projectors on H_B.
struct ProjectiveDecomposition {
  BipartiteSpace space;
  DecompKind kind = DecompKind::basis;
  std::vector<LabeledProjector> projectors;

  // Orthogonality, idempotence, Hermiticity, completeness; throws on failure.
  void require_valid(const Tolerances& tol = {}) const;
};

// Rank-1 projectors onto the columns of `basis` (orthonormal within
// tol.projector). Labels default to the column indices "0", "1", ...
ProjectiveDecomposition basis_decomposition(const BipartiteSpace& space, const Matrix& basis,
                                            std::vector<std::string> labels = {},
                                            const Tolerances& tol = {});

// Computational basis of H_B.
ProjectiveDecomposition computational_decomposition(const BipartiteSpace& space);

// Discrete-Fourier vectors g_m[b] = exp(2*pi*i*m*b/d_B)/sqrt(d_B).
ProjectiveDecomposition fourier_decomposition(const BipartiteSpace& space);

// Schmidt expansion psi = sum_j c_j e_j (x) f_j with c_j > 0 nonincreasing.
// `groups` partitions the indices into degeneracy classes: consecutive sorted
// coefficients whose gap is <= degeneracy_tol chain into one group.
struct SchmidtData {
  std::vector<double> coefficients;
  Matrix vectors_a;  // columns e_j
  Matrix vectors_b;  // columns f_j
  std::vector<std::vector<int>> groups;
};

SchmidtData schmidt(const StateVector& psi, double degeneracy_tol,
                    const Tolerances& tol = {});

// One projector per degeneracy group, onto span{f_j : j in group}; if the
// groups do not exhaust H_B, a final projector labeled "null" covers the
// orthogonal complement so the family is complete. Group labels are "g0",
// "g1", ... in order of decreasing coefficient.
ProjectiveDecomposition schmidt_projectors(const StateVector& psi, double degeneracy_tol,
                                           const Tolerances& tol = {});

// Recipe for building a decomposition at a given time. basis/fourier are
// horizon-stable; schmidt is rebuilt from the state at each time.
struct DecompositionSpec {
  DecompKind kind = DecompKind::basis;
  double degeneracy_tol = 1e-8;             // schmidt only
  std::optional<Matrix> basis;              // basis kind; defaults to computational
  std::vector<std::string> labels;          // basis kind; defaults to indices

  bool state_dependent() const { return kind == DecompKind::schmidt; }
};

ProjectiveDecomposition build_decomposition(const DecompositionSpec& spec,
                                            const BipartiteSpace& space,
                                            const StateVector& psi_at_t,
                                            const Tolerances& tol = {});

}  // namespace qbranch
