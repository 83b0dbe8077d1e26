#include "qbranch/branching.hpp"

#include <cmath>

#include "rand_util.hpp"

namespace qbranch {

TimeDecomposition decompose_at(const BranchingProblem& problem, double t) {
  const StateVector psi_t = propagate(problem.initial_state, 0.0, t, problem.schedule);
  const ProjectiveDecomposition dec =
      build_decomposition(problem.decomposition, psi_t.space, psi_t, problem.tol);

  TimeDecomposition result;
  result.time = t;
  result.kind = dec.kind;
  for (const LabeledProjector& proj : dec.projectors) {
    StateVector component = apply_projector_b(psi_t, proj.op);
    const double n2 = component.squared_norm();
    if (n2 > problem.tol.branch_floor) {
      result.components.push_back({proj.label, std::move(component), n2});
    } else {
      result.dropped_mass += n2;
      result.dropped_count += 1;
    }
  }
  return result;
}

BranchSet final_branches(const BranchingProblem& problem, double horizon) {
  TimeDecomposition dec = decompose_at(problem, horizon);
  BranchSet set;
  set.horizon = horizon;
  set.kind = dec.kind;
  set.dropped_mass = dec.dropped_mass;
  set.dropped_count = dec.dropped_count;
  if (dec.components.empty()) {
    throw Error(ErrorKind::numeric,
                "final_branches: no component above the branch floor; "
                "a complete decomposition of a normalized state cannot vanish");
  }
  set.branches.reserve(dec.components.size());
  for (Component& c : dec.components) {
    set.branches.push_back({c.label, std::move(c.state), c.squared_norm});
  }
  return set;
}

namespace {

// q_l(k) for every branch l and kept component k at time t: evolves each
// component to the horizon once and takes overlaps with every branch.
struct WeightTable {
  TimeDecomposition decomposition;
  std::vector<std::vector<double>> raw;  // [branch][component]
};

WeightTable weight_table(const BranchingProblem& problem, const BranchSet& set, double t) {
  WeightTable table;
  table.decomposition = decompose_at(problem, t);
  std::vector<StateVector> evolved;
  evolved.reserve(table.decomposition.components.size());
  for (const Component& c : table.decomposition.components) {
    evolved.push_back(propagate(c.state, t, set.horizon, problem.schedule));
  }
  table.raw.resize(set.branches.size());
  for (std::size_t l = 0; l < set.branches.size(); ++l) {
    table.raw[l].resize(evolved.size());
    for (std::size_t k = 0; k < evolved.size(); ++k) {
      table.raw[l][k] = std::norm(inner_product(set.branches[l].component, evolved[k]));
    }
  }
  return table;
}

TwoTimeWeights normalize_weights(const Branch& branch, double t,
                                 const TimeDecomposition& dec,
                                 const std::vector<double>& raw) {
  double total = 0.0;
  for (double q : raw) total += q;
  if (total <= 0.0) {
    throw Error(ErrorKind::numeric,
                "two_time_weights: all raw weights vanished for branch '" + branch.label +
                    "' at t=" + std::to_string(t) +
                    " (branch probability " + std::to_string(branch.probability) +
                    "); the component sum should overlap any nonzero branch");
  }
  TwoTimeWeights w;
  w.branch_label = branch.label;
  w.time = t;
  w.component_labels.reserve(dec.components.size());
  for (const Component& c : dec.components) w.component_labels.push_back(c.label);
  w.raw = raw;
  w.weights.resize(raw.size());
  for (std::size_t k = 0; k < raw.size(); ++k) w.weights[k] = raw[k] / total;
  return w;
}

DensityMatrix mix_components(const TimeDecomposition& dec,
                             const std::vector<double>& weights) {
  const BipartiteSpace& space = dec.components.front().state.space;
  Matrix rho = Matrix::Zero(space.dim_a, space.dim_a);
  for (std::size_t k = 0; k < dec.components.size(); ++k) {
    if (weights[k] == 0.0) continue;
    rho += weights[k] * normalized_reduced_state(dec.components[k].state).entries;
  }
  return DensityMatrix(std::move(rho));
}

std::size_t branch_index(const BranchSet& set, const Branch& branch) {
  for (std::size_t l = 0; l < set.branches.size(); ++l) {
    if (set.branches[l].label == branch.label) return l;
  }
  throw Error(ErrorKind::invalid_argument,
              "branch '" + branch.label + "' not found in branch set");
}

}  // namespace

TwoTimeWeights two_time_weights(const BranchingProblem& problem, const Branch& branch,
                                double horizon, double t) {
  if (t < 0.0 || t > horizon) {
    throw Error(ErrorKind::invalid_argument,
                "two_time_weights: t=" + std::to_string(t) + " outside [0, " +
                    std::to_string(horizon) + "]");
  }
  if (!(branch.probability > problem.tol.branch_floor)) {
    throw Error(ErrorKind::invalid_argument,
                "two_time_weights: branch '" + branch.label +
                    "' has probability below the branch floor");
  }
  TimeDecomposition dec = decompose_at(problem, t);
  std::vector<double> raw(dec.components.size());
  for (std::size_t k = 0; k < dec.components.size(); ++k) {
    const StateVector evolved =
        propagate(dec.components[k].state, t, horizon, problem.schedule);
    raw[k] = std::norm(inner_product(branch.component, evolved));
  }
  return normalize_weights(branch, t, dec, raw);
}

DensityMatrix real_state(const BranchingProblem& problem, const Branch& branch,
                         double horizon, double t) {
  TwoTimeWeights w = two_time_weights(problem, branch, horizon, t);
  TimeDecomposition dec = decompose_at(problem, t);
  return mix_components(dec, w.weights);
}

RealStateTrajectory real_state_trajectory(const BranchingProblem& problem,
                                          const Branch& branch, double horizon,
                                          std::span<const double> times) {
  RealStateTrajectory traj;
  traj.branch_label = branch.label;
  traj.times.assign(times.begin(), times.end());
  traj.states.reserve(times.size());
  for (double t : times) {
    traj.states.push_back(real_state(problem, branch, horizon, t));
  }
  return traj;
}

std::vector<DensityMatrix> real_states_at_time(const BranchingProblem& problem,
                                               const BranchSet& set, double t) {
  WeightTable table = weight_table(problem, set, t);
  // Reduced states computed once per component, reused by every branch.
  std::vector<Matrix> reduced;
  reduced.reserve(table.decomposition.components.size());
  for (const Component& c : table.decomposition.components) {
    reduced.push_back(normalized_reduced_state(c.state).entries);
  }
  std::vector<DensityMatrix> states;
  states.reserve(set.branches.size());
  for (std::size_t l = 0; l < set.branches.size(); ++l) {
    TwoTimeWeights w = normalize_weights(set.branches[l], t, table.decomposition,
                                         table.raw[l]);
    const BipartiteSpace& space = problem.initial_state.space;
    Matrix rho = Matrix::Zero(space.dim_a, space.dim_a);
    for (std::size_t k = 0; k < reduced.size(); ++k) {
      if (w.weights[k] != 0.0) rho += w.weights[k] * reduced[k];
    }
    states.push_back(DensityMatrix(std::move(rho)));
  }
  return states;
}

std::string sample_branch(const BranchSet& set, std::uint64_t seed, const Tolerances& tol) {
  return sample_branches(set, seed, 1, tol).front();
}

std::vector<std::string> sample_branches(const BranchSet& set, std::uint64_t seed,
                                         std::size_t count, const Tolerances& tol) {
  double total = 0.0;
  for (const Branch& b : set.branches) total += b.probability;
  if (std::abs(total - 1.0) > tol.sampling_norm) {
    throw Error(ErrorKind::invalid_argument,
                "sample_branches: probabilities sum to " + std::to_string(total) +
                    ", outside 1 +/- " + std::to_string(tol.sampling_norm));
  }
  if (total <= tol.branch_floor) {
    throw Error(ErrorKind::invalid_argument,
                "sample_branches: all probabilities below the branch floor");
  }

  std::mt19937_64 rng(seed);
  std::vector<std::string> labels;
  labels.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double u = detail::unit_uniform(rng) * total;
    double cumulative = 0.0;
    std::size_t chosen = set.branches.size() - 1;
    for (std::size_t l = 0; l < set.branches.size(); ++l) {
      cumulative += set.branches[l].probability;
      if (u < cumulative) {
        chosen = l;
        break;
      }
    }
    labels.push_back(set.branches[chosen].label);
  }
  return labels;
}

}  // namespace qbranch
