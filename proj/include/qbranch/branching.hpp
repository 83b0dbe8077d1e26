#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qbranch/decomposition.hpp"
#include "qbranch/dynamics.hpp"
#include "qbranch/linalg.hpp"

namespace qbranch {

// Everything needed to evaluate branch structure: the initial state, the
// schedule that evolves it, and the decomposition recipe applied on H_B.
struct BranchingProblem {
  StateVector initial_state;
  HamiltonianSchedule schedule;
  DecompositionSpec decomposition;
  Tolerances tol;
};

// One kept component (I (x) P_k) psi(t).
struct Component {
  std::string label;
  StateVector state;
  double squared_norm = 0.0;
};

struct TimeDecomposition {
  double time = 0.0;
  DecompKind kind = DecompKind::basis;
  std::vector<Component> components;
  double dropped_mass = 0.0;  // summed squared norm of discarded components
  int dropped_count = 0;
};

// Components of psi(t) with squared norm above tol.branch_floor. For schmidt
// specs the projector family is rebuilt from psi(t); basis/fourier families
// are fixed for all t.
TimeDecomposition decompose_at(const BranchingProblem& problem, double t);

// A nonzero component of the final-time decomposition; probability is its
// squared norm.
struct Branch {
  std::string label;
  StateVector component;
  double probability = 0.0;
};

struct BranchSet {
  double horizon = 0.0;
  DecompKind kind = DecompKind::basis;
  std::vector<Branch> branches;
  double dropped_mass = 0.0;
  int dropped_count = 0;
};

BranchSet final_branches(const BranchingProblem& problem, double horizon);

// Pre/post-selected weights of the time-t decomposition outcomes, conditioned
// on the initial state and on the final branch:
//   raw[k]     = |<branch, U(T,t) psi_k(t)>|^2
//   weights[k] = raw[k] / sum_k raw[k]
struct TwoTimeWeights {
  std::string branch_label;
  double time = 0.0;
  std::vector<std::string> component_labels;
  std::vector<double> raw;
  std::vector<double> weights;
};

TwoTimeWeights two_time_weights(const BranchingProblem& problem, const Branch& branch,
                                double horizon, double t);

// The mixed state on H_A assigned to the branch at time t: the weighted
// convex combination of the normalized reduced states of the components,
//   rho(t) = sum_k [Tr_B(psi_k psi_k†) / <psi_k, psi_k>] * weights[k].
DensityMatrix real_state(const BranchingProblem& problem, const Branch& branch,
                         double horizon, double t);

struct RealStateTrajectory {
  std::string branch_label;
  std::vector<double> times;
  std::vector<DensityMatrix> states;
};

RealStateTrajectory real_state_trajectory(const BranchingProblem& problem,
                                          const Branch& branch, double horizon,
                                          std::span<const double> times);

// Real states of every branch in the set at one time, sharing the component
// decomposition and the component evolutions across branches. Output order
// matches set.branches.
std::vector<DensityMatrix> real_states_at_time(const BranchingProblem& problem,
                                               const BranchSet& set, double t);

// Draws one branch label from the categorical distribution {p_l}. The result
// depends only on (seed, branch order); probabilities are renormalized first
// and must sum to 1 within tol.sampling_norm.
std::string sample_branch(const BranchSet& set, std::uint64_t seed,
                          const Tolerances& tol = {});

// n independent draws from one generator seeded once.
std::vector<std::string> sample_branches(const BranchSet& set, std::uint64_t seed,
                                         std::size_t count, const Tolerances& tol = {});

}  // namespace qbranch
