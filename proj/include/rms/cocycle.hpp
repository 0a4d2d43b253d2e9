#ifndef RMS_COCYCLE_HPP
#define RMS_COCYCLE_HPP

#include <cstdint>
#include <limits>
#include <memory>
#include <vector>

#include "rms/env.hpp"
#include "rms/matrix.hpp"

namespace rms {

// Map from environment state to the fitness diagonal D(omega): one positive
// diagonal per state of the (finite) driver alphabet. The rotation driver is
// covered through its partition labels.
class DiagonalProcess {
 public:
  explicit DiagonalProcess(std::vector<DiagonalVector> per_state_table);
  std::size_t state_count() const { return table_.size(); }
  std::size_t dim() const { return table_.front().size(); }
  const DiagonalVector& at_state(std::size_t id) const;

 private:
  std::vector<DiagonalVector> table_;
};

// The random matrix system S(omega) = A D(omega) over an ergodic driver.
// Step matrices A D(s) are cached per state at construction.
class RandomMatrixSystem {
 public:
  RandomMatrixSystem(NonnegMatrix a, DiagonalProcess dmap,
                     std::shared_ptr<const EnvironmentDriver> driver);

  const NonnegMatrix& a() const { return a_; }
  const DiagonalProcess& dmap() const { return dmap_; }
  const EnvironmentDriver& driver() const { return *driver_; }
  std::shared_ptr<const EnvironmentDriver> driver_ptr() const { return driver_; }
  std::size_t dim() const { return a_.dim(); }

  const NonnegMatrix& step_matrix(const EnvState& s) const { return steps_[s.id]; }

  EnvPath path(std::uint64_t seed) const { return make_path(driver_, seed); }

  // Same dispersal pattern, A replaced by A + eps * ones (the positivity
  // perturbation used to extend results from positive to nonnegative A).
  RandomMatrixSystem perturbed(double epsilon) const;

 private:
  NonnegMatrix a_;
  DiagonalProcess dmap_;
  std::shared_ptr<const EnvironmentDriver> driver_;
  std::vector<NonnegMatrix> steps_;
};

// A matrix product held as e^logscale * unit with ||unit|| = 1 in the tagged
// norm. logscale == -inf marks an exactly zero product (unit is then zero).
struct ScaledProduct {
  NonnegMatrix unit;
  double logscale = 0.0;
  MatrixNorm norm = MatrixNorm::Frobenius;
  bool is_zero() const { return logscale == -std::numeric_limits<double>::infinity(); }
};

enum class EstimatorMethod { TrajectoryVector, TrajectoryMatrix, Kingman };

struct LyapunovEstimate {
  double value = 0.0;  // may be -inf
  EstimatorMethod method = EstimatorMethod::TrajectoryMatrix;
  std::int64_t n = 0;
  std::int64_t samples = 1;
  double stderr_est = 0.0;
  std::uint64_t seed = 0;
  MatrixNorm norm = MatrixNorm::Frobenius;
};

// Standard error from 20 batch means over one correlated sequence; the
// uncertainty policy shared by all single-trajectory estimators.
double batch_means_stderr(const std::vector<double>& increments);

// S^(n)(omega) = S(theta^{n-1} omega) ... S(omega), renormalized every step.
ScaledProduct cocycle_product(const RandomMatrixSystem& sys, const EnvPath& path, std::int64_t n,
                              MatrixNorm norm = MatrixNorm::Frobenius);

enum class TrajectoryMode { Vector, Matrix };

// Single-trajectory estimate of the top Lyapunov exponent:
//   matrix mode  (1/n) ln ||S^(n)(omega)||, valid for every nonnegative A;
//   vector mode  mean log growth of a positive unit vector, O(N^2)/step,
//                gated on primitive A (otherwise the vector can miss the
//                top direction) - refused with guidance if A is not.
// stderr comes from 20 batch means over the single trajectory.
LyapunovEstimate estimate_lyapunov_trajectory(const RandomMatrixSystem& sys, std::int64_t n,
                                              std::uint64_t seed,
                                              TrajectoryMode mode = TrajectoryMode::Matrix,
                                              MatrixNorm norm = MatrixNorm::Frobenius);

// Monte Carlo estimate of the Kingman upper bound (1/n) E ln ||S^(n)||,
// averaged over num_paths independent paths. Nonincreasing in n in
// expectation; an upper bound on lambda for every fixed n.
LyapunovEstimate estimate_kingman_bound(const RandomMatrixSystem& sys, std::int64_t n,
                                        std::int64_t num_paths, std::uint64_t seed,
                                        MatrixNorm norm = MatrixNorm::Frobenius);

// Exact Kingman value by full enumeration of state words (iid drivers,
// state_count^n <= 10^6). stderr is 0; errors beyond the cap.
bool kingman_exact_feasible(const RandomMatrixSystem& sys, std::int64_t n);
LyapunovEstimate kingman_exact(const RandomMatrixSystem& sys, std::int64_t n,
                               MatrixNorm norm = MatrixNorm::Frobenius);

// Running estimate (1/k) ln ||S^(k)|| sampled at up to max_points
// checkpoints, for convergence plots.
struct TrajectorySeries {
  std::vector<std::int64_t> ns;
  std::vector<double> running;
};
TrajectorySeries trajectory_series(const RandomMatrixSystem& sys, std::int64_t n,
                                   std::uint64_t seed, TrajectoryMode mode = TrajectoryMode::Matrix,
                                   MatrixNorm norm = MatrixNorm::Frobenius,
                                   std::int64_t max_points = 1000);

struct BestOfResult {
  LyapunovEstimate estimate;                   // the trajectory estimate
  std::vector<LyapunovEstimate> kingman_refs;  // upper bounds used as cross-checks
  bool consistent = true;  // trajectory <= every exact Kingman bound + 3 stderr
};

// Runs the trajectory estimator within a total matrix-multiply budget and
// cross-checks it against Kingman upper bounds at small n.
BestOfResult lyapunov_bestof(const RandomMatrixSystem& sys, std::int64_t budget,
                             std::uint64_t seed);

}  // namespace rms

#endif  // RMS_COCYCLE_HPP
