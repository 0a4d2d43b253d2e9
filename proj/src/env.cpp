#include "rms/env.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>

#include "rms/rng.hpp"

namespace rms {

namespace {

void validate_probability_vector(const std::vector<double>& p, const char* what) {
  if (p.empty()) throw ValidationError(std::string(what) + ": probability vector is empty");
  double sum = 0.0;
  for (double x : p) {
    if (!std::isfinite(x) || x < 0.0)
      throw ValidationError(std::string(what) + ": probability entries must be finite and >= 0");
    sum += x;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw ValidationError(std::string(what) + ": probabilities must sum to 1 within 1e-12");
}

// Strong connectivity of the directed graph {(i,j): P[i][j] > 0}.
bool strongly_connected(const std::vector<double>& P, std::size_t n) {
  auto reach = [&](bool transpose) {
    std::vector<char> seen(n, 0);
    std::vector<std::size_t> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      std::size_t u = stack.back();
      stack.pop_back();
      for (std::size_t v = 0; v < n; ++v) {
        double w = transpose ? P[v * n + u] : P[u * n + v];
        if (w > 0.0 && !seen[v]) {
          seen[v] = 1;
          stack.push_back(v);
        }
      }
    }
    return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
  };
  return reach(false) && reach(true);
}

// Period of an irreducible chain: gcd over edges (u,v) of dist[u]+1-dist[v],
// with dist from a BFS rooted at state 0. Aperiodic iff the gcd is 1.
std::int64_t chain_period(const std::vector<double>& P, std::size_t n) {
  std::vector<std::int64_t> dist(n, -1);
  std::vector<std::size_t> queue{0};
  dist[0] = 0;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    std::size_t u = queue[head];
    for (std::size_t v = 0; v < n; ++v) {
      if (P[u * n + v] > 0.0 && dist[v] < 0) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
    }
  }
  std::int64_t g = 0;
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = 0; v < n; ++v)
      if (P[u * n + v] > 0.0) g = std::gcd(g, dist[u] + 1 - dist[v]);
  return g == 0 ? 1 : std::llabs(g);
}

// Solves pi P = pi, sum pi = 1 by Gaussian elimination on (P^T - I) with the
// normalization replacing the last row. One step of iterative refinement
// keeps the residual at the 1e-15 level for well-conditioned chains.
std::vector<double> solve_stationary(const std::vector<double>& P, std::size_t n) {
  std::vector<double> M(n * n), b(n, 0.0);
  auto fill = [&]() {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) M[i * n + j] = P[j * n + i] - (i == j ? 1.0 : 0.0);
    for (std::size_t j = 0; j < n; ++j) M[(n - 1) * n + j] = 1.0;
    std::fill(b.begin(), b.end(), 0.0);
    b[n - 1] = 1.0;
  };
  fill();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(M[r * n + col]) > std::abs(M[piv * n + col])) piv = r;
    if (std::abs(M[piv * n + col]) < 1e-300)
      throw ValidationError("markov: transition matrix is singular (not ergodic)");
    if (piv != col) {
      for (std::size_t j = 0; j < n; ++j) std::swap(M[piv * n + j], M[col * n + j]);
      std::swap(b[piv], b[col]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      double f = M[r * n + col] / M[col * n + col];
      if (f == 0.0) continue;
      for (std::size_t j = col; j < n; ++j) M[r * n + j] -= f * M[col * n + j];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> pi(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= M[i * n + j] * pi[j];
    pi[i] = s / M[i * n + i];
  }
  // Clamp tiny negative round-off and renormalize.
  double sum = 0.0;
  for (double& x : pi) {
    if (x < 0.0 && x > -1e-13) x = 0.0;
    sum += x;
  }
  for (double& x : pi) x /= sum;
  return pi;
}

double stationary_residual(const std::vector<double>& P, const std::vector<double>& pi) {
  std::size_t n = pi.size();
  double worst = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += pi[i] * P[i * n + j];
    worst = std::max(worst, std::abs(s - pi[j]));
  }
  return worst;
}

// Irrationality proxy: reject alpha approximated by a rational p/q with
// q <= 10^6 to within 1e-14, using the continued-fraction convergents.
bool irrational_enough(double alpha) {
  double x = alpha - std::floor(alpha);
  if (x == 0.0) return false;
  // Convergents p_k/q_k of x.
  double frac = x;
  std::int64_t p_prev = 1, q_prev = 0, p_cur = 0, q_cur = 1;
  for (int iter = 0; iter < 64; ++iter) {
    if (frac == 0.0) return false;  // terminated: exactly rational in double
    double inv = 1.0 / frac;
    double a_f = std::floor(inv);
    if (a_f > 9.0e18) break;  // remainder below double resolution: treat as irrational
    std::int64_t a = static_cast<std::int64_t>(a_f);
    std::int64_t p_next = a * p_cur + p_prev;
    std::int64_t q_next = a * q_cur + q_prev;
    if (q_next > 1000000) break;
    p_prev = p_cur;
    q_prev = q_cur;
    p_cur = p_next;
    q_cur = q_next;
    if (std::abs(x - static_cast<double>(p_cur) / static_cast<double>(q_cur)) <= 1e-14)
      return false;
    frac = inv - a_f;
  }
  return true;
}

std::uint64_t to_fixed_point(double x) {
  // x in [0,1); ldexp is exact, the conversion truncates deterministically.
  return static_cast<std::uint64_t>(std::ldexp(x, 64));
}

std::size_t sample_categorical(const double* cum, std::size_t n, double u) {
  // cum is a nondecreasing cumulative vector of length n ending at ~1.
  auto it = std::upper_bound(cum, cum + n, u);
  std::size_t idx = static_cast<std::size_t>(it - cum);
  return std::min(idx, n - 1);
}

std::vector<double> cumulative(const std::vector<double>& p) {
  std::vector<double> cum(p.size());
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    s += p[i];
    cum[i] = s;
  }
  return cum;
}

std::vector<double> flatten(const std::vector<std::vector<double>>& rows, const char* what) {
  std::size_t n = rows.size();
  std::vector<double> flat(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != n)
      throw ValidationError(std::string(what) + ": matrix must be square");
    for (std::size_t j = 0; j < n; ++j) flat[i * n + j] = rows[i][j];
  }
  return flat;
}

}  // namespace

EnvironmentDriver EnvironmentDriver::iid_finite(std::vector<double> probabilities) {
  validate_probability_vector(probabilities, "iid driver");
  EnvironmentDriver d;
  d.kind_ = DriverKind::IidFinite;
  d.states_ = probabilities.size();
  d.pi_ = std::move(probabilities);
  d.finalize_categoricals();
  return d;
}

EnvironmentDriver EnvironmentDriver::markov_finite(std::vector<std::vector<double>> transition) {
  std::size_t n = transition.size();
  if (n == 0) throw ValidationError("markov driver: empty transition matrix");
  std::vector<double> P = flatten(transition, "markov driver");
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row(P.begin() + i * n, P.begin() + (i + 1) * n);
    validate_probability_vector(row, "markov driver row");
  }
  if (!strongly_connected(P, n))
    throw ValidationError("markov driver: not ergodic (transition graph not irreducible)");
  if (chain_period(P, n) != 1)
    throw ValidationError("markov driver: not ergodic (chain is periodic, aperiodicity check fails)");

  EnvironmentDriver d;
  d.kind_ = DriverKind::MarkovFinite;
  d.states_ = n;
  d.P_ = std::move(P);
  d.pi_ = solve_stationary(d.P_, n);
  if (stationary_residual(d.P_, d.pi_) > 1e-12)
    throw ValidationError("markov driver: stationary solve residual exceeds 1e-12");
  for (double x : d.pi_)
    if (x <= 0.0) throw ValidationError("markov driver: degenerate stationary law (some pi_i = 0)");
  d.Prev_.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      d.Prev_[i * n + j] = d.pi_[j] * d.P_[j * n + i] / d.pi_[i];
  d.finalize_categoricals();
  return d;
}

EnvironmentDriver EnvironmentDriver::markov_finite(std::vector<std::vector<double>> transition,
                                                   const std::vector<double>& stationary_hint) {
  EnvironmentDriver d = markov_finite(std::move(transition));
  if (stationary_hint.size() != d.states_)
    throw ValidationError("markov driver: stationary hint has wrong length");
  validate_probability_vector(stationary_hint, "markov driver stationary hint");
  if (stationary_residual(d.P_, stationary_hint) > 1e-10)
    throw ValidationError("markov driver: supplied stationary vector fails pi P = pi within 1e-10");
  return d;
}

EnvironmentDriver EnvironmentDriver::rotation(double alpha, double x0,
                                              std::vector<double> boundaries) {
  if (!std::isfinite(alpha) || !irrational_enough(alpha))
    throw ValidationError(
        "rotation driver: alpha must be irrational (no p/q with q <= 1e6 within 1e-14)");
  if (!std::isfinite(x0) || x0 < 0.0 || x0 >= 1.0)
    throw ValidationError("rotation driver: initial point must lie in [0,1)");
  if (boundaries.empty() || boundaries.front() != 0.0)
    throw ValidationError("rotation driver: partition boundaries must start at 0.0");
  for (std::size_t i = 0; i < boundaries.size(); ++i) {
    if (!std::isfinite(boundaries[i]) || boundaries[i] < 0.0 || boundaries[i] >= 1.0)
      throw ValidationError("rotation driver: boundaries must lie in [0,1)");
    if (i > 0 && boundaries[i] <= boundaries[i - 1])
      throw ValidationError("rotation driver: boundaries must be strictly increasing");
  }

  EnvironmentDriver d;
  d.kind_ = DriverKind::Rotation;
  d.states_ = boundaries.size();
  d.alpha_ = alpha - std::floor(alpha);
  d.x0_ = x0;
  d.bounds_ = std::move(boundaries);
  d.alpha_fp_ = to_fixed_point(d.alpha_);
  d.x0_fp_ = to_fixed_point(d.x0_);
  d.bounds_fp_.resize(d.bounds_.size());
  for (std::size_t i = 0; i < d.bounds_.size(); ++i) d.bounds_fp_[i] = to_fixed_point(d.bounds_[i]);
  return d;
}

void EnvironmentDriver::finalize_categoricals() {
  cum_pi_ = cumulative(pi_);
  if (kind_ == DriverKind::MarkovFinite) {
    cum_P_.resize(states_ * states_);
    cum_Prev_.resize(states_ * states_);
    for (std::size_t i = 0; i < states_; ++i) {
      double s = 0.0, r = 0.0;
      for (std::size_t j = 0; j < states_; ++j) {
        s += P_[i * states_ + j];
        cum_P_[i * states_ + j] = s;
        r += Prev_[i * states_ + j];
        cum_Prev_[i * states_ + j] = r;
      }
    }
  }
}

const std::vector<double>& EnvironmentDriver::stationary() const {
  if (kind_ == DriverKind::Rotation)
    throw ValidationError("rotation driver: no finite stationary representation");
  return pi_;
}

std::size_t EnvironmentDriver::region_of(std::uint64_t x_fp) const {
  auto it = std::upper_bound(bounds_fp_.begin(), bounds_fp_.end(), x_fp);
  return static_cast<std::size_t>(it - bounds_fp_.begin()) - 1;
}

std::size_t EnvironmentDriver::sample_initial(double u) const {
  return sample_categorical(cum_pi_.data(), states_, u);
}

std::size_t EnvironmentDriver::sample_forward(std::size_t from, double u) const {
  return sample_categorical(cum_P_.data() + from * states_, states_, u);
}

std::size_t EnvironmentDriver::sample_backward(std::size_t from, double u) const {
  return sample_categorical(cum_Prev_.data() + from * states_, states_, u);
}

std::vector<double> stationary_distribution(const EnvironmentDriver& driver) {
  return driver.stationary();
}

EnvPath::EnvPath(std::shared_ptr<const EnvironmentDriver> driver, std::uint64_t seed)
    : driver_(std::move(driver)), seed_(seed) {
  if (!driver_) throw ValidationError("path: driver must not be null");
  if (driver_->kind() == DriverKind::MarkovFinite) cache_ = std::make_shared<MarkovCache>();
}

EnvPath EnvPath::shifted(std::int64_t offset) const {
  EnvPath p = *this;
  p.offset_ += offset;
  return p;
}

double EnvPath::uniform_at(std::int64_t k) const { return uniform01(seed_, k + offset_); }

std::size_t EnvPath::markov_state(std::int64_t k) const {
  std::lock_guard<std::mutex> lock(cache_->mu);
  auto& fwd = cache_->fwd;
  auto& bwd = cache_->bwd;
  if (fwd.empty())
    fwd.push_back(static_cast<std::uint32_t>(driver_->sample_initial(uniform01(seed_, 0))));
  if (k >= 0) {
    while (static_cast<std::int64_t>(fwd.size()) <= k) {
      std::int64_t next = static_cast<std::int64_t>(fwd.size());
      fwd.push_back(static_cast<std::uint32_t>(
          driver_->sample_forward(fwd.back(), uniform01(seed_, next))));
    }
    return fwd[static_cast<std::size_t>(k)];
  }
  std::size_t need = static_cast<std::size_t>(-k);
  while (bwd.size() < need) {
    std::size_t from = bwd.empty() ? fwd[0] : bwd.back();
    std::int64_t index = -static_cast<std::int64_t>(bwd.size()) - 1;
    bwd.push_back(
        static_cast<std::uint32_t>(driver_->sample_backward(from, uniform01(seed_, index))));
  }
  return bwd[need - 1];
}

EnvState EnvPath::state_at(std::int64_t k) const {
  const std::int64_t j = k + offset_;
  switch (driver_->kind()) {
    case DriverKind::IidFinite:
      return EnvState{driver_->sample_initial(uniform01(seed_, j)), 0.0};
    case DriverKind::MarkovFinite:
      return EnvState{markov_state(j), 0.0};
    case DriverKind::Rotation: {
      const std::uint64_t x =
          driver_->x0_fp() + static_cast<std::uint64_t>(j) * driver_->alpha_fp();
      return EnvState{driver_->region_of(x), std::ldexp(static_cast<double>(x), -64)};
    }
  }
  throw ValidationError("path: unknown driver kind");
}

EnvPath make_path(std::shared_ptr<const EnvironmentDriver> driver, std::uint64_t seed) {
  return EnvPath(std::move(driver), seed);
}

double birkhoff_average(const EnvPath& path, const std::function<double(const EnvState&)>& f,
                        std::int64_t n) {
  if (n < 1) throw ValidationError("birkhoff_average: n must be >= 1");
  double sum = 0.0;
  for (std::int64_t k = 0; k < n; ++k) sum += f(path.state_at(k));
  return sum / static_cast<double>(n);
}

}  // namespace rms
