#include "qbranch/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qbranch {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

BranchMatch match_by_label(const BranchSet& a, const BranchSet& b) {
  BranchMatch match;
  match.min_overlap_gap = std::numeric_limits<double>::infinity();
  std::vector<bool> used_b(b.branches.size(), false);
  for (int l = 0; l < static_cast<int>(a.branches.size()); ++l) {
    bool found = false;
    for (int m = 0; m < static_cast<int>(b.branches.size()); ++m) {
      if (!used_b[m] && a.branches[l].label == b.branches[m].label) {
        match.pairs.emplace_back(l, m);
        used_b[m] = true;
        found = true;
        break;
      }
    }
    if (!found) match.unmatched_from.push_back(l);
  }
  for (int m = 0; m < static_cast<int>(b.branches.size()); ++m) {
    if (!used_b[m]) match.unmatched_to.push_back(m);
  }
  return match;
}

BranchMatch match_by_overlap(const BranchSet& a, const BranchSet& b,
                             const HamiltonianSchedule& sched, const Tolerances& tol) {
  const int na = static_cast<int>(a.branches.size());
  const int nb = static_cast<int>(b.branches.size());
  Eigen::MatrixXd overlap(na, nb);
  for (int l = 0; l < na; ++l) {
    const StateVector evolved =
        propagate(a.branches[l].component, a.horizon, b.horizon, sched);
    for (int m = 0; m < nb; ++m) {
      overlap(l, m) = std::abs(inner_product(b.branches[m].component, evolved));
    }
  }

  BranchMatch match;
  match.min_overlap_gap = std::numeric_limits<double>::infinity();
  std::vector<bool> used_a(na, false), used_b(nb, false);
  for (int step = 0; step < std::min(na, nb); ++step) {
    int best_l = -1, best_m = -1;
    double best = -1.0;
    for (int l = 0; l < na; ++l) {
      if (used_a[l]) continue;
      for (int m = 0; m < nb; ++m) {
        if (used_b[m]) continue;
        if (overlap(l, m) > best) {
          best = overlap(l, m);
          best_l = l;
          best_m = m;
        }
      }
    }
    // Closest unused alternative sharing the chosen row or column.
    double runner_up = -1.0;
    for (int m = 0; m < nb; ++m) {
      if (m != best_m && !used_b[m]) runner_up = std::max(runner_up, overlap(best_l, m));
    }
    for (int l = 0; l < na; ++l) {
      if (l != best_l && !used_a[l]) runner_up = std::max(runner_up, overlap(l, best_m));
    }
    if (runner_up >= 0.0) {
      const double gap = best - runner_up;
      match.min_overlap_gap = std::min(match.min_overlap_gap, gap);
      if (gap < tol.matching_ambiguity) match.ambiguous = true;
    }
    used_a[best_l] = true;
    used_b[best_m] = true;
    match.pairs.emplace_back(best_l, best_m);
  }
  for (int l = 0; l < na; ++l) {
    if (!used_a[l]) match.unmatched_from.push_back(l);
  }
  for (int m = 0; m < nb; ++m) {
    if (!used_b[m]) match.unmatched_to.push_back(m);
  }
  return match;
}

}  // namespace

BranchMatch match_branches(const BranchSet& at_t, const BranchSet& at_t2,
                           const HamiltonianSchedule& sched, const Tolerances& tol) {
  if (!(at_t.horizon < at_t2.horizon)) {
    throw Error(ErrorKind::invalid_argument,
                "match_branches: horizons must satisfy T < T'");
  }
  if (at_t.kind == DecompKind::schmidt || at_t2.kind == DecompKind::schmidt) {
    return match_by_overlap(at_t, at_t2, sched, tol);
  }
  return match_by_label(at_t, at_t2);
}

HorizonReport horizon_sweep(const BranchingProblem& problem, std::span<const double> horizons,
                            std::span<const double> sample_times, double eps_p,
                            double eps_rho, int n_stable) {
  if (horizons.empty()) {
    throw Error(ErrorKind::invalid_argument, "horizon_sweep: empty horizon list");
  }
  for (std::size_t i = 1; i < horizons.size(); ++i) {
    if (!(horizons[i] > horizons[i - 1])) {
      throw Error(ErrorKind::invalid_argument,
                  "horizon_sweep: horizons must be strictly increasing");
    }
  }
  if (!problem.schedule.contains_time(horizons.back())) {
    throw Error(ErrorKind::invalid_argument,
                "horizon_sweep: schedule is shorter than the largest horizon " +
                    std::to_string(horizons.back()));
  }
  for (double t : sample_times) {
    if (t < 0.0 || t > horizons.front()) {
      throw Error(ErrorKind::invalid_argument,
                  "horizon_sweep: sample time " + std::to_string(t) +
                      " outside [0, min horizon]");
    }
  }

  const int nh = static_cast<int>(horizons.size());
  const int nt = static_cast<int>(sample_times.size());

  HorizonReport report;
  report.horizons.assign(horizons.begin(), horizons.end());
  report.sample_times.assign(sample_times.begin(), sample_times.end());
  report.eps_p = eps_p;
  report.eps_rho = eps_rho;
  report.n_stable = n_stable;

  std::vector<BranchSet> sets;
  sets.reserve(nh);
  // states[i][branch][time]
  std::vector<std::vector<std::vector<DensityMatrix>>> states(nh);
  for (int i = 0; i < nh; ++i) {
    sets.push_back(final_branches(problem, horizons[i]));
    report.branch_counts.push_back(static_cast<int>(sets[i].branches.size()));
    report.dropped_mass.push_back(sets[i].dropped_mass);
    states[i].resize(sets[i].branches.size());
    for (int ti = 0; ti < nt; ++ti) {
      auto at_time = real_states_at_time(problem, sets[i], sample_times[ti]);
      for (std::size_t l = 0; l < at_time.size(); ++l) {
        states[i][l].push_back(std::move(at_time[l]));
      }
    }
  }

  // Chains across horizons: chain_at[i][l] = chain id of branch l at horizon i.
  std::vector<std::vector<int>> chain_at(nh);
  int n_chains = static_cast<int>(sets[0].branches.size());
  chain_at[0].resize(n_chains);
  for (int l = 0; l < n_chains; ++l) chain_at[0][l] = l;

  std::vector<BranchMatch> matches;
  bool any_unmatched = false;
  for (int i = 0; i + 1 < nh; ++i) {
    BranchMatch match = match_branches(sets[i], sets[i + 1], problem.schedule, problem.tol);
    if (match.ambiguous) report.ambiguous_matching = true;
    if (!match.unmatched_from.empty() || !match.unmatched_to.empty()) any_unmatched = true;
    chain_at[i + 1].assign(sets[i + 1].branches.size(), -1);
    for (const auto& [l, m] : match.pairs) {
      chain_at[i + 1][m] = chain_at[i][l];
    }
    for (int m : match.unmatched_to) {
      chain_at[i + 1][m] = n_chains++;
    }
    matches.push_back(std::move(match));
  }

  // Assemble one series per chain.
  report.series.resize(n_chains);
  report.limit_states.resize(n_chains);
  for (int c = 0; c < n_chains; ++c) {
    report.series[c].probabilities.assign(nh, kNaN);
    report.series[c].present.assign(nh, false);
    report.series[c].p_min = std::numeric_limits<double>::infinity();
    report.series[c].p_max = -std::numeric_limits<double>::infinity();
  }
  for (int i = 0; i < nh; ++i) {
    for (std::size_t l = 0; l < sets[i].branches.size(); ++l) {
      const int c = chain_at[i][l];
      BranchSeries& s = report.series[c];
      const double p = sets[i].branches[l].probability;
      s.probabilities[i] = p;
      s.present[i] = true;
      s.p_min = std::min(s.p_min, p);
      s.p_max = std::max(s.p_max, p);
      s.p_estimate = p;
      s.label = sets[i].branches[l].label;
      report.limit_states[c] = states[i][l];  // overwritten until the last presence
    }
  }

  // Per-pair convergence data over matched chains.
  for (int i = 0; i + 1 < nh; ++i) {
    double max_dp = 0.0;
    double sum_dp = 0.0;
    double max_dist = 0.0;
    std::vector<std::vector<double>> pair_distances(
        n_chains, std::vector<double>(nt, kNaN));
    for (const auto& [l, m] : matches[i].pairs) {
      const double dp =
          std::abs(sets[i].branches[l].probability - sets[i + 1].branches[m].probability);
      max_dp = std::max(max_dp, dp);
      sum_dp += dp;
      const int c = chain_at[i][l];
      for (int ti = 0; ti < nt; ++ti) {
        const double dist =
            trace_distance(states[i][l][ti], states[i + 1][m][ti], problem.tol);
        pair_distances[c][ti] = dist;
        max_dist = std::max(max_dist, dist);
      }
    }
    report.max_probability_step.push_back(max_dp);
    report.max_state_distance.push_back(max_dist);
    report.matched_probability_discrepancy.push_back(sum_dp);
    report.state_distances.push_back(std::move(pair_distances));
  }

  report.branch_count_stable =
      !any_unmatched && std::all_of(report.branch_counts.begin(), report.branch_counts.end(),
                                    [&](int c) { return c == report.branch_counts[0]; });

  const int n_pairs = nh - 1;
  if (n_pairs < n_stable) {
    report.converged = false;
    report.notes.push_back("fewer horizon pairs than n_stable; convergence undecidable");
  } else {
    bool stable = true;
    for (int i = n_pairs - n_stable; i < n_pairs; ++i) {
      const bool pair_matched =
          matches[i].unmatched_from.empty() && matches[i].unmatched_to.empty();
      if (!pair_matched || report.max_probability_step[i] > eps_p ||
          report.max_state_distance[i] > eps_rho) {
        stable = false;
        break;
      }
    }
    report.converged = stable;
  }

  if (problem.decomposition.state_dependent()) {
    report.notes.push_back(
        "schmidt decomposition: cross-horizon branch identity uses overlap "
        "matching, which is a reporting convention, not part of the branch "
        "definition");
  }
  if (report.ambiguous_matching) {
    report.notes.push_back("branch matching encountered near-degenerate overlaps");
  }
  if (!report.converged) {
    report.notes.push_back(
        "not converged at these horizons; see per-series p_min/p_max envelopes "
        "to distinguish oscillation from drift");
  }
  return report;
}

FtbornReport ftborn_check(const ModelSpec& model, std::span<const double> horizons,
                          double eps, const Tolerances& tol) {
  if (horizons.empty()) {
    throw Error(ErrorKind::invalid_argument, "ftborn_check: empty horizon list");
  }
  for (std::size_t i = 1; i < horizons.size(); ++i) {
    if (!(horizons[i] > horizons[i - 1])) {
      throw Error(ErrorKind::invalid_argument,
                  "ftborn_check: horizons must be strictly increasing");
    }
  }

  const BranchTree tree = branch_tree(model, tol);
  const std::size_t n_leaves = tree.leaves().size();

  FtbornReport report;
  report.horizons.assign(horizons.begin(), horizons.end());
  for (std::size_t j = 0; j < n_leaves; ++j) {
    report.leaf_labels.push_back(tree.leaf_label(j));
    report.leaf_probabilities.push_back(tree.leaf_squared_norm(j));
  }

  const BranchingProblem problem = model.problem(tol);
  std::vector<StateVector> leaf_states_last;
  for (double t : horizons) {
    const StateVector psi_t = propagate(problem.initial_state, 0.0, t, problem.schedule);
    std::vector<Complex> overlaps(n_leaves);
    leaf_states_last.clear();
    for (std::size_t j = 0; j < n_leaves; ++j) {
      StateVector leaf = tree.leaf_state_at(j, t);
      overlaps[j] = inner_product(psi_t, leaf);
      leaf_states_last.push_back(std::move(leaf));
    }
    report.overlap_series.push_back(std::move(overlaps));
  }

  // Compare tree probabilities with branch probabilities at the last horizon,
  // pairing by label.
  const BranchSet branches = final_branches(problem, horizons.back());
  report.branch_probabilities.assign(n_leaves, kNaN);
  for (std::size_t j = 0; j < n_leaves; ++j) {
    double branch_p = 0.0;  // an unmatched leaf counts as a full mismatch
    for (const Branch& b : branches.branches) {
      if (b.label == report.leaf_labels[j]) {
        branch_p = b.probability;
        report.branch_probabilities[j] = b.probability;
        break;
      }
    }
    report.max_probability_mismatch = std::max(
        report.max_probability_mismatch, std::abs(report.leaf_probabilities[j] - branch_p));
  }

  const auto& last = report.overlap_series.back();
  for (std::size_t j = 0; j < n_leaves; ++j) {
    report.max_overlap_deviation = std::max(
        report.max_overlap_deviation, std::abs(last[j] - report.leaf_probabilities[j]));
    for (std::size_t j2 = 0; j2 < n_leaves; ++j2) {
      const Complex g = inner_product(leaf_states_last[j], leaf_states_last[j2]);
      const double expected = (j == j2) ? report.leaf_probabilities[j] : 0.0;
      report.max_orthogonality_violation =
          std::max(report.max_orthogonality_violation, std::abs(g - expected));
    }
  }

  if (report.overlap_series.size() >= 2) {
    const auto& prev = report.overlap_series[report.overlap_series.size() - 2];
    double step = 0.0;
    for (std::size_t j = 0; j < n_leaves; ++j) {
      step = std::max(step, std::abs(last[j] - prev[j]));
    }
    report.stabilized = step <= eps;
  } else {
    report.stabilized = report.max_overlap_deviation <= eps;
  }
  return report;
}

}  // namespace qbranch
