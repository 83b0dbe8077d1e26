#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qbranch/branching.hpp"

namespace qbranch {

// A record-forming event: at `time` the environment qubit `env_qubit` has
// finished copying the system bit (pointer basis = computational basis of
// that qubit). Used to build the branch tree.
struct RecordingEvent {
  double time = 0.0;
  int env_qubit = 0;
};

struct ModelSpec {
  std::string name;
  BipartiteSpace space;
  StateVector initial_state;
  HamiltonianSchedule schedule;
  DecompositionSpec recommended_decomposition;
  std::vector<RecordingEvent> recording_events;
  std::vector<std::string> expected_branch_labels;

  BranchingProblem problem(const Tolerances& tol = {}) const {
    return BranchingProblem{initial_state, schedule, recommended_decomposition, tol};
  }
};

// System qubit coupled in turn to n_env environment qubits. Around each
// recording time a window of duration pi/(2g) applies g |1><1|_sys (x) X_j,
// an exact controlled flip of qubit j up to phase; H = 0 elsewhere and after
// the last window (open-ended). Requires one recording time per environment
// qubit. With the recommended computational-basis decomposition the final
// branches are the all-0 and all-1 records with probabilities |alpha|^2 and
// |beta|^2.
ModelSpec measurement_chain(Complex alpha, Complex beta, int n_env, double coupling,
                            std::span<const double> recording_times);

// One-qubit measurement chain whose record is actively unwritten: the window
// around t_unrecord applies the inverse interaction, restoring the product
// form. The final decomposition has a single branch. No recording events are
// listed (the branch tree cannot represent the erasure without merging).
ModelSpec recoherence_model(Complex alpha, Complex beta, double t_record,
                            double t_unrecord, double coupling);

// Generic stress case: H = energy_scale * (G + G†)/2 with G_ij drawn from a
// seeded standard complex normal, and a random normalized initial state.
// Horizon sweeps on this model are expected not to converge.
ModelSpec random_model(std::uint64_t seed, int dim_a, int dim_b, double energy_scale);

// Branching tree: the evolving state splits at each recording event into
// pointer-basis components; components never merge. Leaves are the final
// components.
struct BranchTreeNode {
  int parent = -1;
  std::vector<int> children;
  double t_start = 0.0;
  double t_end = 0.0;  // +inf for leaves
  StateVector component;  // unnormalized, at t_start
  std::string label;      // outcome digits accumulated along the path
};

class BranchTree {
 public:
  BranchTree(std::vector<BranchTreeNode> nodes, std::vector<int> leaves,
             HamiltonianSchedule schedule);

  const std::vector<BranchTreeNode>& nodes() const { return nodes_; }
  const std::vector<int>& leaves() const { return leaves_; }

  // The branch state of leaf j at time t: the component of the ancestor
  // active at t, evolved to t.
  StateVector leaf_state_at(std::size_t leaf, double t) const;
  double leaf_squared_norm(std::size_t leaf) const;
  const std::string& leaf_label(std::size_t leaf) const;

 private:
  std::vector<BranchTreeNode> nodes_;
  std::vector<int> leaves_;
  HamiltonianSchedule schedule_;
};

// Requires model.recording_events to be nonempty or the model to be
// event-free (zero events yield a single-leaf tree).
BranchTree branch_tree(const ModelSpec& model, const Tolerances& tol = {});

}  // namespace qbranch
