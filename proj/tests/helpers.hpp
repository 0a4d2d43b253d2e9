// Shared scenario builders for the test suites.
#ifndef RMS_TESTS_HELPERS_HPP
#define RMS_TESTS_HELPERS_HPP

#include <memory>
#include <vector>

#include "rms/cocycle.hpp"
#include "rms/rng.hpp"
#include "oracles.hpp"

namespace rms::testing {

inline std::shared_ptr<const EnvironmentDriver> iid_driver(std::vector<double> p) {
  return std::make_shared<EnvironmentDriver>(EnvironmentDriver::iid_finite(std::move(p)));
}

inline std::shared_ptr<const EnvironmentDriver> markov_driver(
    std::vector<std::vector<double>> P) {
  return std::make_shared<EnvironmentDriver>(EnvironmentDriver::markov_finite(std::move(P)));
}

// All-ones 2x2 dispersal with d_1, d_2 independent iid on {1,4}: the
// strict-inequality flagship example. lambda = (1/4) ln 400, ln rho(A Dbar) = ln 4.
inline RandomMatrixSystem allones_iid_system() {
  NonnegMatrix a = NonnegMatrix::ones(2);
  std::vector<DiagonalVector> table{
      DiagonalVector({1.0, 1.0}), DiagonalVector({1.0, 4.0}),
      DiagonalVector({4.0, 1.0}), DiagonalVector({4.0, 4.0})};
  return RandomMatrixSystem(a, DiagonalProcess(std::move(table)),
                            iid_driver({0.25, 0.25, 0.25, 0.25}));
}

// Permutation dispersal [[0,1],[1,0]] with the same d-law: the equality
// example, lambda = ln 2 = ln rho(A Dbar).
inline RandomMatrixSystem permutation_iid_system() {
  NonnegMatrix a = NonnegMatrix::from_rows({{0.0, 1.0}, {1.0, 0.0}});
  std::vector<DiagonalVector> table{
      DiagonalVector({1.0, 1.0}), DiagonalVector({1.0, 4.0}),
      DiagonalVector({4.0, 1.0}), DiagonalVector({4.0, 4.0})};
  return RandomMatrixSystem(a, DiagonalProcess(std::move(table)),
                            iid_driver({0.25, 0.25, 0.25, 0.25}));
}

// Deterministic cocycle S(omega) = A D, single-state driver.
inline RandomMatrixSystem constant_system(const NonnegMatrix& a, std::vector<double> d) {
  std::vector<DiagonalVector> table{DiagonalVector(std::move(d))};
  return RandomMatrixSystem(a, DiagonalProcess(std::move(table)), iid_driver({1.0}));
}

// Random scenario with iid or markov driver; deterministic in `seed`.
// d-levels are log-uniform in [0.1, 10]; `zero_fraction` controls how much
// of A is zeroed (0 gives a strictly positive matrix).
inline RandomMatrixSystem random_system(std::uint64_t seed, double zero_fraction,
                                        std::size_t max_dim = 6) {
  std::size_t n = 1 + static_cast<std::size_t>(uniform01(seed, 0) * static_cast<double>(max_dim));
  NonnegMatrix a = oracles::random_matrix(splitmix64(seed), n, zero_fraction, 0.2, 5.0);
  std::size_t states = 2 + static_cast<std::size_t>(uniform01(seed, 1) * 3.0);
  std::vector<DiagonalVector> table;
  for (std::size_t s = 0; s < states; ++s) {
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) {
      double u = uniform01(splitmix64(seed + 17), static_cast<std::int64_t>(s * n + i));
      d[i] = std::pow(10.0, -1.0 + 2.0 * u);  // [0.1, 10]
    }
    table.emplace_back(std::move(d));
  }
  std::shared_ptr<const EnvironmentDriver> drv;
  if (uniform01(seed, 2) < 0.5) {
    std::vector<double> p(states);
    double sum = 0.0;
    for (std::size_t s = 0; s < states; ++s) {
      p[s] = 0.2 + uniform01(seed, 10 + static_cast<std::int64_t>(s));
      sum += p[s];
    }
    for (double& x : p) x /= sum;
    // Renormalize exactly so the driver validation accepts it.
    double acc = 0.0;
    for (std::size_t s = 0; s + 1 < states; ++s) acc += p[s];
    p[states - 1] = 1.0 - acc;
    drv = iid_driver(std::move(p));
  } else {
    std::vector<std::vector<double>> P(states, std::vector<double>(states));
    for (std::size_t i = 0; i < states; ++i) {
      double sum = 0.0;
      for (std::size_t j = 0; j < states; ++j) {
        P[i][j] = 0.1 + uniform01(seed, 100 + static_cast<std::int64_t>(i * states + j));
        sum += P[i][j];
      }
      double acc = 0.0;
      for (std::size_t j = 0; j + 1 < states; ++j) {
        P[i][j] /= sum;
        acc += P[i][j];
      }
      P[i][states - 1] = 1.0 - acc;
    }
    drv = markov_driver(std::move(P));
  }
  return RandomMatrixSystem(std::move(a), DiagonalProcess(std::move(table)), std::move(drv));
}

inline RandomMatrixSystem random_positive_system(std::uint64_t seed, std::size_t max_dim = 6) {
  return random_system(seed, 0.0, max_dim);
}

}  // namespace rms::testing

#endif  // RMS_TESTS_HELPERS_HPP
