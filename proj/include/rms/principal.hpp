#ifndef RMS_PRINCIPAL_HPP
#define RMS_PRINCIPAL_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "rms/cocycle.hpp"

namespace rms {

// Birkhoff projective diameter of the cone image of a positive matrix:
// Delta(A) = max_{i,j,k,l} ln (a_ik a_jl) / (a_jk a_il). Infinite (rejected)
// unless A is strictly positive.
double projective_diameter(const NonnegMatrix& a);

// Contraction coefficient tau(A) = tanh(Delta(A)/4) of a positive matrix in
// the Hilbert projective metric. Column scalings S = A D contract exactly as
// A does, since diagonal factors cancel from all cross ratios.
double birkhoff_contraction(const NonnegMatrix& a);

// Hilbert projective distance between strictly positive vectors.
double hilbert_distance(const std::vector<double>& x, const std::vector<double>& y);

// The random Perron pair at one orbit position: unit positive w with
// S(omega) w(omega) = rho(omega) w(theta omega) up to `residual`.
struct PrincipalPair {
  std::vector<double> w;
  double rho = 0.0;
  double residual = 0.0;
  std::int64_t backward_depth = 0;
};

struct PrincipalOptions {
  double tol = 1e-8;            // invariance residual target
  std::int64_t min_depth = 1;   // starting pull-back depth (auto-raised)
  std::int64_t max_depth = 1 << 16;
};

// Unit positive vector at `at_index` obtained by pushing (1,..,1)/sqrt(N)
// through the `depth` step matrices ending there (uses negative path indices
// when depth reaches left of the origin).
std::vector<double> principal_pullback(const RandomMatrixSystem& sys, const EnvPath& path,
                                       std::int64_t at_index, std::int64_t depth);

// Constructive realization of the measurable Perron pair by pull-back: w at
// `at_index` is the image of a fixed positive vector under the last `depth`
// step matrices, so cone contraction makes it independent of the start to
// within tol. The depth starts at the value suggested by tau(A) and doubles
// until the invariance residual (checked against an independently pulled
// back w at at_index + 1) meets tol. Requires strictly positive A.
PrincipalPair principal_pair(const RandomMatrixSystem& sys, const EnvPath& path,
                             std::int64_t at_index, const PrincipalOptions& opts = {});

// lambda as the Birkhoff mean of ln rho(theta^k omega), k in [0, n): one
// pull-back at index 0, then the forward recursion w(k+1) = S w(k)/rho(k).
LyapunovEstimate lambda_from_rho(const RandomMatrixSystem& sys, const EnvPath& path,
                                 std::int64_t n, const PrincipalOptions& opts = {});

struct BoundCheckResult {
  bool holds = false;
  double worst_margin = 0.0;  // min over pairs of (min_i w_i - 1/(sqrt(N) kappa))
};

// The quantitative form of the uniform lower bound on ln w_i:
// min_i w_i >= 1/(sqrt(N) kappa) for every converged pair.
BoundCheckResult integrability_bound_check(const NonnegMatrix& a,
                                           const std::vector<PrincipalPair>& pairs);

// Replay of the Cesaro averaging argument along one simulated orbit.
// Records w(k), rho(k), d(k) for k in [0,n) plus the running geometric means
//   w~_i(m) = exp((1/m) sum_{k<m} ln w_i(k)),  w^_i(m) likewise over [1,m],
//   d~_i(m), rho~(m),
// and verifies, for every prefix m <= n:
//   (a) the step identity w_i(k+1) rho(k) = sum_j a_ij d_j(k) w_j(k),
//   (b) sum_j a_ij d~_j(m) w~_j(m) <= rho~(m) w^_i(m) for all i,
//   (c) w^_i(m)/w~_i(m) = (w_i(m)/w_i(0))^(1/m),
//   (d) at m = n the subinvariance test on the averaged system.
struct CesaroTrace {
  std::int64_t n = 0;
  std::size_t dim = 0;

  std::vector<double> w;    // (n+1) x N, w(k)_i at row k
  std::vector<double> rho;  // n
  std::vector<double> d;    // n x N

  std::vector<double> w_tilde, w_hat, d_tilde;  // at m = n
  double rho_tilde = 0.0;

  double max_step_identity_error = 0.0;  // (a), relative
  double min_prefix_margin = 0.0;        // (b), relative, over all m and i
  double max_mean_identity_error = 0.0;  // (c)
  SubinvarianceResult subinvariance;     // (d)

  bool ok = false;
  std::string failure;  // first violated inequality, with prefix and index
};

CesaroTrace cesaro_proof_trace(const RandomMatrixSystem& sys, const EnvPath& path, std::int64_t n,
                               const PrincipalOptions& opts = {});

}  // namespace rms

#endif  // RMS_PRINCIPAL_HPP
