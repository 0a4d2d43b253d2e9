#ifndef RMS_AVERAGING_HPP
#define RMS_AVERAGING_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "rms/cocycle.hpp"

namespace rms {

// The geometrically averaged system: dbar_i = exp E[ln d_i] and the matrix
// A Dbar together with its spectral radius bracket. Finite drivers give the
// expectation exactly from the stationary law; the rotation driver falls
// back to a Birkhoff Monte Carlo estimate with a batch-means stderr.
struct AveragedSystem {
  std::vector<double> dbar;
  NonnegMatrix adbar;
  SpectralBracket rho_bracket;
  double log_rho = 0.0;  // ln of the bracket midpoint; -inf when rho = 0
  double log_rho_halfwidth = 0.0;  // half of ln(upper/lower)
  bool exact = true;               // false: Monte Carlo dbar
  double dbar_log_stderr = 0.0;    // worst per-entry stderr of ln dbar_i (MC only)
};

AveragedSystem averaged_system(const RandomMatrixSystem& sys, std::int64_t mc_n = 200000,
                               std::uint64_t mc_seed = 1);

enum class Verdict { Holds, HoldsWithEquality, ViolatedBeyondTolerance };

std::string verdict_name(Verdict v);

// One run of the Main Theorem check: margin = lambda_hat - ln rho(A Dbar),
// compared against a tolerance that adds the estimator stderr, the spectral
// bracket width, and (Monte Carlo dbar only) the averaging stderr.
struct TheoremReport {
  LyapunovEstimate lambda;
  AveragedSystem averaged;
  double margin = 0.0;
  double tolerance = 0.0;
  Verdict verdict = Verdict::Holds;
  bool short_circuit_zero_rho = false;  // rho(A Dbar) = 0 holds trivially
};

TheoremReport check_main_theorem(const RandomMatrixSystem& sys, std::int64_t n,
                                 std::uint64_t seed);

// The positivity ladder A + eps B. All levels share one path (common random
// numbers), which turns the norm comparison ||S^(n)|| <= ||S_eps1^(n)|| <=
// ||S_eps2^(n)|| into an exact pathwise assertion, checked at n in
// {1,10,100} on several shared paths.
struct EpsilonLadder {
  std::vector<double> epsilons;            // strictly decreasing
  std::vector<LyapunovEstimate> lambdas;   // one per epsilon, shared seed
  LyapunovEstimate base;                   // unperturbed system, same seed
  double extrapolated_limit = 0.0;         // smallest-epsilon estimate
  double bracket_low = 0.0;                // base value (monotone bracket)
  double bracket_high = 0.0;               // smallest-epsilon value
  bool chains_ok = false;
  double worst_chain_violation = 0.0;      // relative, should be <= 1e-12
};

EpsilonLadder epsilon_ladder(const RandomMatrixSystem& sys, const std::vector<double>& epsilons,
                             std::int64_t n, std::uint64_t seed);

// General nonnegative A: the direct check and the epsilon route (Main
// Theorem on each positive A + eps B, with ln rho((A+epsB) Dbar) decreasing
// to ln rho(A Dbar)) must agree on whether the bound holds.
struct GeneralTheoremReport {
  TheoremReport direct;
  EpsilonLadder ladder;
  std::vector<TheoremReport> per_epsilon;
  bool routes_agree = true;
  std::string diagnostic;
};

GeneralTheoremReport check_main_theorem_general(const RandomMatrixSystem& sys,
                                                const std::vector<double>& epsilons,
                                                std::int64_t n, std::uint64_t seed);

}  // namespace rms

#endif  // RMS_AVERAGING_HPP
