#ifndef RMS_ENV_HPP
#define RMS_ENV_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <vector>

#include "rms/errors.hpp"

namespace rms {

// Environment state at one time index. `id` indexes the driver's finite
// state set; for the rotation driver `point` additionally carries the orbit
// point in [0,1) (it is 0 for the finite drivers).
struct EnvState {
  std::size_t id = 0;
  double point = 0.0;
};

enum class DriverKind { IidFinite, MarkovFinite, Rotation };

// An ergodic, invertible base dynamic over a finite state alphabet.
//
// Three kinds are supported:
//   iid-finite    independent draws from a fixed law p
//   markov-finite irreducible aperiodic chain started from its stationary law
//   rotation      x -> x + alpha mod 1 with a finite partition of [0,1)
//
// Construction validates ergodicity up front: probability vectors must be
// normalized, Markov chains irreducible and aperiodic, rotation steps
// irrational (proxy: no rational p/q with q <= 10^6 within 1e-14).
class EnvironmentDriver {
 public:
  static EnvironmentDriver iid_finite(std::vector<double> probabilities);
  static EnvironmentDriver markov_finite(std::vector<std::vector<double>> transition);
  // Validates the supplied stationary vector instead of trusting it.
  static EnvironmentDriver markov_finite(std::vector<std::vector<double>> transition,
                                         const std::vector<double>& stationary_hint);
  // `boundaries` lists the left endpoints of the partition cells, starting
  // at 0.0, strictly increasing, all < 1; cell s is [b_s, b_{s+1}).
  static EnvironmentDriver rotation(double alpha, double x0, std::vector<double> boundaries);

  DriverKind kind() const { return kind_; }
  std::size_t state_count() const { return states_; }

  // iid law or Markov stationary law; throws on rotation.
  const std::vector<double>& stationary() const;

  double transition(std::size_t i, std::size_t j) const { return P_[i * states_ + j]; }
  // Time-reversed chain P~[i][j] = pi_j P[j][i] / pi_i.
  double reversed_transition(std::size_t i, std::size_t j) const { return Prev_[i * states_ + j]; }

  double alpha() const { return alpha_; }
  double initial_point() const { return x0_; }
  const std::vector<double>& boundaries() const { return bounds_; }

  // Fixed-point (x / 2^64) representation of the rotation; addition and
  // subtraction of alpha_fp are exact inverses of each other mod 2^64.
  std::uint64_t alpha_fp() const { return alpha_fp_; }
  std::uint64_t x0_fp() const { return x0_fp_; }
  std::size_t region_of(std::uint64_t x_fp) const;

  // Categorical draws shared by path construction and tests.
  std::size_t sample_initial(double u) const;
  std::size_t sample_forward(std::size_t from, double u) const;   // markov row of P
  std::size_t sample_backward(std::size_t from, double u) const;  // markov row of P~

 private:
  EnvironmentDriver() = default;

  DriverKind kind_ = DriverKind::IidFinite;
  std::size_t states_ = 0;

  std::vector<double> pi_;                 // iid law / markov stationary law
  std::vector<double> P_, Prev_;           // markov transition and reversal, row-major
  std::vector<double> cum_pi_, cum_P_, cum_Prev_;

  double alpha_ = 0.0, x0_ = 0.0;
  std::vector<double> bounds_;
  std::uint64_t alpha_fp_ = 0, x0_fp_ = 0;
  std::vector<std::uint64_t> bounds_fp_;

  void finalize_categoricals();
};

// Stationary distribution as an operation: identity on iid, the solution of
// pi P = pi (residual <= 1e-12) for markov, an error for rotation.
std::vector<double> stationary_distribution(const EnvironmentDriver& driver);

// A two-sided realization of the base orbit {theta^k omega}_{k in Z}.
//
// state_at(k) is deterministic in (driver, seed, k). Negative indices carry
// the stationary law: iid uses the counter at index k directly, markov runs
// the time-reversed chain left from index 0, rotation subtracts alpha in
// exact fixed point. shifted(j) is the path of theta^j omega: the same orbit
// viewed j steps later, so shifted(j).state_at(k) == state_at(k + j).
//
// Immutable after construction; concurrent state_at calls are safe.
class EnvPath {
 public:
  EnvPath(std::shared_ptr<const EnvironmentDriver> driver, std::uint64_t seed);

  EnvState state_at(std::int64_t k) const;
  EnvPath shifted(std::int64_t offset) const;

  const EnvironmentDriver& driver() const { return *driver_; }
  std::shared_ptr<const EnvironmentDriver> driver_ptr() const { return driver_; }
  std::uint64_t seed() const { return seed_; }
  std::int64_t offset() const { return offset_; }

  // Per-index uniform actually consumed at (absolute) index k; exposed so
  // tests can verify the step-law invariants.
  double uniform_at(std::int64_t k) const;

 private:
  struct MarkovCache {
    mutable std::mutex mu;
    mutable std::vector<std::uint32_t> fwd;  // states at 0,1,2,...
    mutable std::vector<std::uint32_t> bwd;  // states at -1,-2,...
  };

  std::size_t markov_state(std::int64_t k) const;

  std::shared_ptr<const EnvironmentDriver> driver_;
  std::uint64_t seed_ = 0;
  std::int64_t offset_ = 0;
  std::shared_ptr<MarkovCache> cache_;
};

// Builds the two-sided path; named for the backward half, whose law is the
// nontrivial part (the forward half is plain simulation).
EnvPath make_path(std::shared_ptr<const EnvironmentDriver> driver, std::uint64_t seed);

// (1/n) sum_{k=0}^{n-1} f(state_at(k)).
double birkhoff_average(const EnvPath& path, const std::function<double(const EnvState&)>& f,
                        std::int64_t n);

}  // namespace rms

#endif  // RMS_ENV_HPP
