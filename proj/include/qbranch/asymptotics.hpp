#pragma once

#include <span>
#include <string>
#include <vector>

#include "qbranch/branching.hpp"
#include "qbranch/models.hpp"

namespace qbranch {

// Pairing between the branches of two horizons. basis/fourier kinds pair by
// projector label; schmidt kinds pair greedily by evolved overlap. A pairing
// whose winning overlap is separated from the runner-up by less than the
// ambiguity tolerance is flagged, never hidden.
struct BranchMatch {
  std::vector<std::pair<int, int>> pairs;  // (index at T, index at T')
  std::vector<int> unmatched_from;
  std::vector<int> unmatched_to;
  bool ambiguous = false;
  double min_overlap_gap = 0.0;
};

BranchMatch match_branches(const BranchSet& at_t, const BranchSet& at_t2,
                           const HamiltonianSchedule& sched, const Tolerances& tol = {});

// One branch chain followed across the horizon list.
struct BranchSeries {
  std::string label;                  // label at the last horizon where present
  std::vector<double> probabilities;  // NaN where absent
  std::vector<bool> present;
  double p_min = 0.0;  // running envelope over present horizons
  double p_max = 0.0;
  double p_estimate = 0.0;  // last-horizon value
};

struct HorizonReport {
  std::vector<double> horizons;
  std::vector<double> sample_times;
  double eps_p = 1e-9;
  double eps_rho = 1e-9;
  int n_stable = 3;

  std::vector<BranchSeries> series;
  std::vector<int> branch_counts;                       // per horizon
  std::vector<double> max_probability_step;             // per consecutive pair
  std::vector<double> max_state_distance;               // per pair, over (branch, t)
  std::vector<double> matched_probability_discrepancy;  // sum_l |dp| per pair
  std::vector<double> dropped_mass;                     // per horizon
  // state_distances[pair][series][time]; NaN where the series is absent on
  // either side of the pair.
  std::vector<std::vector<std::vector<double>>> state_distances;

  bool branch_count_stable = false;
  bool ambiguous_matching = false;
  bool converged = false;
  std::vector<std::string> notes;

  // Last-horizon real states per series per sample time; the asymptotic
  // estimates rho^inf(t) when converged.
  std::vector<std::vector<DensityMatrix>> limit_states;
};

// Evaluates final branches and real-state trajectories at each horizon,
// matches branches across consecutive horizons, and reports convergence:
// converged iff over the final n_stable consecutive pairs every matched
// probability moves by <= eps_p, every real state by <= eps_rho in trace
// distance, and the matched branch count never changes.
HorizonReport horizon_sweep(const BranchingProblem& problem, std::span<const double> horizons,
                            std::span<const double> sample_times, double eps_p = 1e-9,
                            double eps_rho = 1e-9, int n_stable = 3);

// Final-time Born-rule diagnostics for models with a branch tree: the series
// <psi(t), psi_j(t)> per leaf across horizons, its agreement with the branch
// probabilities, and the asymptotic orthogonality of the leaf states.
struct FtbornReport {
  std::vector<double> horizons;
  std::vector<std::string> leaf_labels;
  std::vector<double> leaf_probabilities;             // squared leaf norms
  std::vector<std::vector<Complex>> overlap_series;   // [horizon][leaf]
  std::vector<double> branch_probabilities;           // label-matched, last horizon
  double max_probability_mismatch = 0.0;              // |tree p - branch p|
  double max_overlap_deviation = 0.0;    // |<psi,psi_j> - p_j| at last horizon
  double max_orthogonality_violation = 0.0;  // |<psi_j,psi_j'> - p_j d_jj'| at last horizon
  bool stabilized = false;  // trailing overlap step below eps
};

FtbornReport ftborn_check(const ModelSpec& model, std::span<const double> horizons,
                          double eps = 1e-9, const Tolerances& tol = {});

}  // namespace qbranch
