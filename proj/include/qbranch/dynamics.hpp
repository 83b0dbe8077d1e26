#pragma once

#include <memory>
#include <vector>

#include "qbranch/types.hpp"

namespace qbranch {

struct Segment {
  Matrix hamiltonian;
  double duration = 0.0;
};

struct SegmentSpectrum {
  RealVector eigenvalues;
  Matrix eigenvectors;  // columns; H = V diag(lambda) V†
};

struct Propagator {
  double t_from = 0.0;
  double t_to = 0.0;
  Matrix u;
};

// Piecewise-constant Hamiltonian on [0, horizon]. Each segment's spectrum is
// computed once on first use and shared between copies, so horizon sweeps
// reuse the same eigendecompositions. Immutable after construction.
class HamiltonianSchedule {
 public:
  // Empty schedule; unusable until assigned. Exists so owning types stay
  // default-constructible.
  HamiltonianSchedule() : starts_{0.0} {}

  HamiltonianSchedule(std::vector<Segment> segments, bool open_ended = false,
                      const Tolerances& tol = {});

  // Single open-ended H = 0 segment.
  static HamiltonianSchedule free_evolution(int dim);

  int dimension() const { return dim_; }
  std::size_t segment_count() const { return segments_.size(); }
  const Segment& segment(std::size_t i) const { return segments_[i]; }
  double segment_start(std::size_t i) const { return starts_[i]; }
  double segment_end(std::size_t i) const { return starts_[i + 1]; }
  bool open_ended() const { return open_ended_; }

  // Sum of segment durations; the last segment extends past this when the
  // schedule is open-ended.
  double closed_horizon() const { return starts_.back(); }
  double horizon() const;
  bool contains_time(double t) const;

  const SegmentSpectrum& spectrum(std::size_t i) const;

 private:
  std::vector<Segment> segments_;
  std::vector<double> starts_;  // size segment_count()+1, starts_[0] = 0
  bool open_ended_ = false;
  int dim_ = 0;
  struct SpectraCache;
  std::shared_ptr<SpectraCache> cache_;
};

// exp(-i H dt) via spectral decomposition, H = V diag(lambda) V†.
Propagator eigen_propagator(const Matrix& hamiltonian, double dt, const Tolerances& tol = {});

// U(t2, t1) as the ordered product of segment exponentials covering [t1, t2].
// t2 < t1 yields the adjoint (backward evolution).
Propagator propagator_between(const HamiltonianSchedule& sched, double t1, double t2);

// Applies U(t2, t1) to psi without forming the full matrix.
StateVector propagate(const StateVector& psi, double t1, double t2,
                      const HamiltonianSchedule& sched);

}  // namespace qbranch
