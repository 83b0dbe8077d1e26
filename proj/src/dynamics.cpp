#include "qbranch/dynamics.hpp"

#include <cmath>
#include <limits>
#include <mutex>

#include "qbranch/linalg.hpp"

namespace qbranch {

struct HamiltonianSchedule::SpectraCache {
  explicit SpectraCache(std::size_t n) : spectra(n), flags(n) {}
  std::vector<SegmentSpectrum> spectra;
  std::vector<std::once_flag> flags;
};

HamiltonianSchedule::HamiltonianSchedule(std::vector<Segment> segments, bool open_ended,
                                         const Tolerances& tol)
    : segments_(std::move(segments)), open_ended_(open_ended) {
  if (segments_.empty()) {
    throw Error(ErrorKind::invalid_argument, "HamiltonianSchedule: no segments");
  }
  dim_ = static_cast<int>(segments_.front().hamiltonian.rows());
  starts_.reserve(segments_.size() + 1);
  starts_.push_back(0.0);
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const Segment& seg = segments_[i];
    if (seg.hamiltonian.rows() != dim_ || seg.hamiltonian.cols() != dim_) {
      throw Error(ErrorKind::invalid_argument,
                  "HamiltonianSchedule: segment " + std::to_string(i) +
                      " has inconsistent dimension");
    }
    if (!is_hermitian(seg.hamiltonian, tol.hermiticity)) {
      throw Error(ErrorKind::invalid_argument,
                  "HamiltonianSchedule: segment " + std::to_string(i) +
                      " Hamiltonian is not Hermitian within tolerance");
    }
    if (!(seg.duration > 0.0)) {
      throw Error(ErrorKind::invalid_argument,
                  "HamiltonianSchedule: segment " + std::to_string(i) +
                      " duration must be > 0");
    }
    starts_.push_back(starts_.back() + seg.duration);
  }
  cache_ = std::make_shared<SpectraCache>(segments_.size());
}

HamiltonianSchedule HamiltonianSchedule::free_evolution(int dim) {
  return HamiltonianSchedule({Segment{Matrix::Zero(dim, dim), 1.0}}, /*open_ended=*/true);
}

double HamiltonianSchedule::horizon() const {
  return open_ended_ ? std::numeric_limits<double>::infinity() : closed_horizon();
}

bool HamiltonianSchedule::contains_time(double t) const {
  return t >= 0.0 && t <= horizon();
}

const SegmentSpectrum& HamiltonianSchedule::spectrum(std::size_t i) const {
  std::call_once(cache_->flags[i], [&] {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(segments_[i].hamiltonian);
    if (solver.info() != Eigen::Success) {
      throw Error(ErrorKind::numeric,
                  "HamiltonianSchedule: eigendecomposition failed on segment " +
                      std::to_string(i));
    }
    cache_->spectra[i] = SegmentSpectrum{solver.eigenvalues(), solver.eigenvectors()};
  });
  return cache_->spectra[i];
}

namespace {

Vector phase_factors(const RealVector& eigenvalues, double dt) {
  Vector phases(eigenvalues.size());
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    phases[i] = std::exp(Complex(0.0, -eigenvalues[i] * dt));
  }
  return phases;
}

void require_in_schedule(const HamiltonianSchedule& sched, double t, const char* op) {
  if (!sched.contains_time(t)) {
    throw Error(ErrorKind::invalid_argument,
                std::string(op) + ": time " + std::to_string(t) +
                    " outside schedule [0, " + std::to_string(sched.horizon()) + "]");
  }
}

// Ordered (segment index, dt) pieces covering [t1, t2] with t1 <= t2.
std::vector<std::pair<std::size_t, double>> cover(const HamiltonianSchedule& sched,
                                                  double t1, double t2) {
  std::vector<std::pair<std::size_t, double>> pieces;
  const std::size_t n = sched.segment_count();
  for (std::size_t i = 0; i < n; ++i) {
    const double seg_start = sched.segment_start(i);
    const double seg_end = (i + 1 == n && sched.open_ended())
                               ? std::numeric_limits<double>::infinity()
                               : sched.segment_end(i);
    const double lo = std::max(t1, seg_start);
    const double hi = std::min(t2, seg_end);
    if (hi > lo) pieces.emplace_back(i, hi - lo);
  }
  return pieces;
}

}  // namespace

Propagator eigen_propagator(const Matrix& hamiltonian, double dt, const Tolerances& tol) {
  if (!is_hermitian(hamiltonian, tol.hermiticity)) {
    throw Error(ErrorKind::invalid_argument,
                "eigen_propagator: Hamiltonian is not Hermitian within tolerance");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(hamiltonian);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::numeric, "eigen_propagator: eigendecomposition failed");
  }
  const Matrix& v = solver.eigenvectors();
  Matrix u = v * phase_factors(solver.eigenvalues(), dt).asDiagonal() * v.adjoint();
  return Propagator{0.0, dt, std::move(u)};
}

Propagator propagator_between(const HamiltonianSchedule& sched, double t1, double t2) {
  require_in_schedule(sched, t1, "propagator_between");
  require_in_schedule(sched, t2, "propagator_between");
  const bool backward = t2 < t1;
  const double lo = backward ? t2 : t1;
  const double hi = backward ? t1 : t2;
  Matrix u = Matrix::Identity(sched.dimension(), sched.dimension());
  for (const auto& [i, dt] : cover(sched, lo, hi)) {
    const SegmentSpectrum& s = sched.spectrum(i);
    Matrix piece = s.eigenvectors * phase_factors(s.eigenvalues, dt).asDiagonal() *
                   s.eigenvectors.adjoint();
    u = piece * u;
  }
  if (backward) u = u.adjoint().eval();
  return Propagator{t1, t2, std::move(u)};
}

StateVector propagate(const StateVector& psi, double t1, double t2,
                      const HamiltonianSchedule& sched) {
  if (psi.amplitudes.size() != sched.dimension()) {
    throw Error(ErrorKind::invalid_argument,
                "propagate: state dimension " + std::to_string(psi.amplitudes.size()) +
                    " does not match schedule dimension " +
                    std::to_string(sched.dimension()));
  }
  require_in_schedule(sched, t1, "propagate");
  require_in_schedule(sched, t2, "propagate");
  const bool backward = t2 < t1;
  const double lo = backward ? t2 : t1;
  const double hi = backward ? t1 : t2;
  auto pieces = cover(sched, lo, hi);
  if (backward) std::reverse(pieces.begin(), pieces.end());

  Vector amps = psi.amplitudes;
  for (const auto& [i, dt] : pieces) {
    const SegmentSpectrum& s = sched.spectrum(i);
    const double signed_dt = backward ? -dt : dt;
    amps = s.eigenvectors *
           (phase_factors(s.eigenvalues, signed_dt).asDiagonal() *
            (s.eigenvectors.adjoint() * amps));
  }
  return StateVector(psi.space, std::move(amps));
}

}  // namespace qbranch
