#include "qbranch/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "rand_util.hpp"

namespace qbranch {

namespace {

Matrix pauli_x() {
  Matrix x(2, 2);
  x << 0, 1, 1, 0;
  return x;
}

// X on environment qubit j, where qubit 0 is the most significant bit of the
// environment index (labels read left to right).
Matrix env_flip(int n_env, int j) {
  const int left = 1 << j;
  const int right = 1 << (n_env - 1 - j);
  return kron(kron(Matrix::Identity(left, left), pauli_x()),
              Matrix::Identity(right, right));
}

// g |1><1|_sys (x) X_j on the full space.
Matrix record_interaction(int n_env, int j, double coupling) {
  Matrix excited = Matrix::Zero(2, 2);
  excited(1, 1) = 1.0;
  return coupling * kron(excited, env_flip(n_env, j));
}

StateVector qubit_chain_initial_state(Complex alpha, Complex beta, int n_env) {
  const BipartiteSpace space(2, 1 << n_env);
  Vector amps = Vector::Zero(space.total());
  amps[space.flat(0, 0)] = alpha;
  amps[space.flat(1, 0)] = beta;
  return StateVector(space, std::move(amps));
}

void require_unit_amplitudes(Complex alpha, Complex beta) {
  const double n2 = std::norm(alpha) + std::norm(beta);
  if (std::abs(n2 - 1.0) > 1e-12) {
    throw Error(ErrorKind::invalid_argument,
                "model: |alpha|^2 + |beta|^2 = " + std::to_string(n2) + ", expected 1");
  }
}

std::vector<std::string> bitstring_labels(int n_env) {
  const int db = 1 << n_env;
  std::vector<std::string> labels(db);
  for (int b = 0; b < db; ++b) {
    std::string s(n_env, '0');
    for (int j = 0; j < n_env; ++j) {
      if (b & (1 << (n_env - 1 - j))) s[j] = '1';
    }
    labels[b] = std::move(s);
  }
  return labels;
}

}  // namespace

ModelSpec measurement_chain(Complex alpha, Complex beta, int n_env, double coupling,
                            std::span<const double> recording_times) {
  require_unit_amplitudes(alpha, beta);
  if (n_env < 1) {
    throw Error(ErrorKind::invalid_argument, "measurement_chain: n_env must be >= 1");
  }
  if (static_cast<int>(recording_times.size()) != n_env) {
    throw Error(ErrorKind::invalid_argument,
                "measurement_chain: expected one recording time per environment qubit (" +
                    std::to_string(n_env) + "), got " +
                    std::to_string(recording_times.size()));
  }
  if (!(coupling > 0.0)) {
    throw Error(ErrorKind::invalid_argument, "measurement_chain: coupling must be > 0");
  }

  const double window = std::numbers::pi / (2.0 * coupling);
  const int db = 1 << n_env;
  const int dim = 2 * db;

  std::vector<Segment> segments;
  std::vector<RecordingEvent> events;
  double cursor = 0.0;
  for (int j = 0; j < n_env; ++j) {
    const double start = recording_times[j] - window / 2.0;
    const double end = recording_times[j] + window / 2.0;
    if (start < cursor - 1e-12) {
      throw Error(ErrorKind::invalid_argument,
                  "measurement_chain: recording window " + std::to_string(j) +
                      " overlaps the previous one (or starts before t=0)");
    }
    if (start > cursor) {
      segments.push_back({Matrix::Zero(dim, dim), start - cursor});
    }
    segments.push_back({record_interaction(n_env, j, coupling), window});
    events.push_back({end, j});
    cursor = end;
  }
  segments.push_back({Matrix::Zero(dim, dim), 1.0});  // quiet tail, extendable

  ModelSpec model;
  model.name = "measurement_chain";
  model.space = BipartiteSpace(2, db);
  model.initial_state = qubit_chain_initial_state(alpha, beta, n_env);
  model.schedule = HamiltonianSchedule(std::move(segments), /*open_ended=*/true);
  model.recommended_decomposition =
      DecompositionSpec{DecompKind::basis, 1e-8, std::nullopt, bitstring_labels(n_env)};
  model.recording_events = std::move(events);
  if (std::norm(alpha) > 0.0) model.expected_branch_labels.push_back(std::string(n_env, '0'));
  if (std::norm(beta) > 0.0) model.expected_branch_labels.push_back(std::string(n_env, '1'));
  return model;
}

ModelSpec recoherence_model(Complex alpha, Complex beta, double t_record,
                            double t_unrecord, double coupling) {
  require_unit_amplitudes(alpha, beta);
  if (!(coupling > 0.0)) {
    throw Error(ErrorKind::invalid_argument, "recoherence_model: coupling must be > 0");
  }
  const double window = std::numbers::pi / (2.0 * coupling);
  if (t_record - window / 2.0 < 0.0) {
    throw Error(ErrorKind::invalid_argument,
                "recoherence_model: recording window starts before t=0");
  }
  if (t_record + window / 2.0 > t_unrecord - window / 2.0 + 1e-12) {
    throw Error(ErrorKind::invalid_argument,
                "recoherence_model: recording and unrecording windows overlap");
  }

  const int dim = 4;
  const Matrix h_int = record_interaction(1, 0, coupling);
  std::vector<Segment> segments;
  double cursor = 0.0;
  auto add_gap = [&](double until) {
    if (until > cursor) segments.push_back({Matrix::Zero(dim, dim), until - cursor});
    cursor = until;
  };
  add_gap(t_record - window / 2.0);
  segments.push_back({h_int, window});
  cursor += window;
  add_gap(t_unrecord - window / 2.0);
  segments.push_back({-h_int, window});
  cursor += window;
  segments.push_back({Matrix::Zero(dim, dim), 1.0});

  ModelSpec model;
  model.name = "recoherence";
  model.space = BipartiteSpace(2, 2);
  model.initial_state = qubit_chain_initial_state(alpha, beta, 1);
  model.schedule = HamiltonianSchedule(std::move(segments), /*open_ended=*/true);
  model.recommended_decomposition =
      DecompositionSpec{DecompKind::basis, 1e-8, std::nullopt, bitstring_labels(1)};
  model.expected_branch_labels = {"0"};
  return model;
}

ModelSpec random_model(std::uint64_t seed, int dim_a, int dim_b, double energy_scale) {
  const BipartiteSpace space(dim_a, dim_b);
  if (space.total() > 4096) {
    throw Error(ErrorKind::invalid_argument,
                "random_model: total dimension " + std::to_string(space.total()) +
                    " exceeds the dense-matrix target 4096");
  }
  const int dim = space.total();
  std::mt19937_64 rng(seed);

  Matrix g(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      g(i, j) = Complex(detail::standard_normal(rng), detail::standard_normal(rng));
    }
  }
  Matrix h = energy_scale * 0.5 * (g + g.adjoint());

  Vector amps(dim);
  for (int i = 0; i < dim; ++i) {
    amps[i] = Complex(detail::standard_normal(rng), detail::standard_normal(rng));
  }
  amps /= amps.norm();

  ModelSpec model;
  model.name = "random-" + std::to_string(seed);
  model.space = space;
  model.initial_state = StateVector(space, std::move(amps));
  model.schedule = HamiltonianSchedule({Segment{std::move(h), 1.0}}, /*open_ended=*/true);
  model.recommended_decomposition = DecompositionSpec{DecompKind::basis, 1e-8, {}, {}};
  return model;
}

BranchTree::BranchTree(std::vector<BranchTreeNode> nodes, std::vector<int> leaves,
                       HamiltonianSchedule schedule)
    : nodes_(std::move(nodes)), leaves_(std::move(leaves)), schedule_(std::move(schedule)) {}

StateVector BranchTree::leaf_state_at(std::size_t leaf, double t) const {
  if (leaf >= leaves_.size()) {
    throw Error(ErrorKind::invalid_argument, "BranchTree: leaf index out of range");
  }
  int idx = leaves_[leaf];
  while (nodes_[idx].t_start > t) {
    idx = nodes_[idx].parent;
    if (idx < 0) {
      throw Error(ErrorKind::invalid_argument,
                  "BranchTree: time " + std::to_string(t) + " precedes the root");
    }
  }
  return propagate(nodes_[idx].component, nodes_[idx].t_start, t, schedule_);
}

double BranchTree::leaf_squared_norm(std::size_t leaf) const {
  return nodes_[leaves_.at(leaf)].component.squared_norm();
}

const std::string& BranchTree::leaf_label(std::size_t leaf) const {
  return nodes_[leaves_.at(leaf)].label;
}

BranchTree branch_tree(const ModelSpec& model, const Tolerances& tol) {
  // Pointer projectors need qubit structure on H_B.
  const int db = model.space.dim_b;
  int n_env = 0;
  while ((1 << n_env) < db) ++n_env;
  if ((1 << n_env) != db) {
    throw Error(ErrorKind::invalid_argument,
                "branch_tree: environment dimension " + std::to_string(db) +
                    " is not a power of two");
  }

  std::vector<RecordingEvent> events = model.recording_events;
  std::sort(events.begin(), events.end(),
            [](const RecordingEvent& a, const RecordingEvent& b) { return a.time < b.time; });

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<BranchTreeNode> nodes;
  nodes.push_back({-1, {}, 0.0, inf, model.initial_state, ""});
  std::vector<int> active = {0};

  for (const RecordingEvent& event : events) {
    if (event.env_qubit < 0 || event.env_qubit >= n_env) {
      throw Error(ErrorKind::invalid_argument,
                  "branch_tree: event references environment qubit " +
                      std::to_string(event.env_qubit) + " outside [0, " +
                      std::to_string(n_env) + ")");
    }
    // Projectors onto the event qubit's computational outcomes.
    const int left = 1 << event.env_qubit;
    const int right = 1 << (n_env - 1 - event.env_qubit);
    std::vector<Matrix> pointer(2);
    for (int m = 0; m < 2; ++m) {
      Matrix bit = Matrix::Zero(2, 2);
      bit(m, m) = 1.0;
      pointer[m] = kron(kron(Matrix::Identity(left, left), bit),
                        Matrix::Identity(right, right));
    }

    std::vector<int> next_active;
    for (int idx : active) {
      StateVector evolved =
          propagate(nodes[idx].component, nodes[idx].t_start, event.time, model.schedule);
      nodes[idx].t_end = event.time;
      for (int m = 0; m < 2; ++m) {
        StateVector child = apply_projector_b(evolved, pointer[m]);
        if (child.squared_norm() > tol.branch_floor) {
          const int child_idx = static_cast<int>(nodes.size());
          nodes.push_back({idx, {}, event.time, inf, std::move(child),
                           nodes[idx].label + std::to_string(m)});
          nodes[idx].children.push_back(child_idx);
          next_active.push_back(child_idx);
        }
      }
    }
    active = std::move(next_active);
  }

  return BranchTree(std::move(nodes), std::move(active), model.schedule);
}

}  // namespace qbranch
