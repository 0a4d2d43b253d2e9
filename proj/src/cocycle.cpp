#include "rms/cocycle.hpp"

#include <algorithm>
#include <cmath>

#include "rms/rng.hpp"

namespace rms {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double vec_norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// dst = M * src for row-major M.
void matvec(const NonnegMatrix& m, const std::vector<double>& src, std::vector<double>& dst) {
  const std::size_t n = m.dim();
  dst.assign(n, 0.0);
  const auto& a = m.entries();
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    const double* row = &a[i * n];
    for (std::size_t j = 0; j < n; ++j) s += row[j] * src[j];
    dst[i] = s;
  }
}

// out = M * P for raw row-major buffers of dimension n.
void left_mul(const std::vector<double>& m, const std::vector<double>& p, std::size_t n,
              std::vector<double>& out) {
  out.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      double mik = m[i * n + k];
      if (mik == 0.0) continue;
      const double* row = &p[k * n];
      double* dst = &out[i * n];
      for (std::size_t j = 0; j < n; ++j) dst[j] += mik * row[j];
    }
}

double frob(const std::vector<double>& a) {
  double s = 0.0;
  for (double x : a) s += x * x;
  return std::sqrt(s);
}

double buffer_norm(const std::vector<double>& a, std::size_t n, MatrixNorm norm) {
  if (norm == MatrixNorm::Frobenius) return frob(a);
  return matrix_norm(NonnegMatrix(n, a), MatrixNorm::Operator2);
}

// Core product walk: returns final (unit, logscale) and optionally the
// per-step log increments. Aborts with -inf logscale if the product dies.
struct WalkResult {
  std::vector<double> unit;
  double logscale = 0.0;     // ln ||S^(n)||, including the initial ln ||I||
  double initial_log = 0.0;  // ln ||I|| in the walk's norm
  bool zero = false;
};

WalkResult product_walk(const RandomMatrixSystem& sys, const EnvPath& path, std::int64_t n,
                        MatrixNorm norm, std::vector<double>* increments) {
  const std::size_t dim = sys.dim();
  WalkResult r;
  r.unit.assign(dim * dim, 0.0);
  for (std::size_t i = 0; i < dim; ++i) r.unit[i * dim + i] = 1.0;
  double norm0 = buffer_norm(r.unit, dim, norm);
  for (double& x : r.unit) x /= norm0;
  r.logscale = std::log(norm0);
  r.initial_log = r.logscale;

  std::vector<double> next;
  if (increments) increments->reserve(static_cast<std::size_t>(n));
  for (std::int64_t k = 0; k < n; ++k) {
    const NonnegMatrix& step = sys.step_matrix(path.state_at(k));
    left_mul(step.entries(), r.unit, dim, next);
    double nn = buffer_norm(next, dim, norm);
    if (nn == 0.0) {
      r.zero = true;
      r.logscale = kNegInf;
      r.unit.assign(dim * dim, 0.0);
      if (increments) increments->push_back(kNegInf);
      return r;
    }
    for (std::size_t i = 0; i < dim * dim; ++i) r.unit[i] = next[i] / nn;
    double g = std::log(nn);
    r.logscale += g;
    if (increments) increments->push_back(g);
  }
  return r;
}

}  // namespace

// The single long trajectory is split into up to 20 equal blocks whose means
// are treated as approximately independent draws.
double batch_means_stderr(const std::vector<double>& increments) {
  const std::size_t n = increments.size();
  const std::size_t batches = std::min<std::size_t>(20, n);
  if (batches < 2) return 0.0;
  std::vector<double> means(batches, 0.0);
  std::size_t base = n / batches, rem = n % batches, pos = 0;
  for (std::size_t b = 0; b < batches; ++b) {
    std::size_t len = base + (b < rem ? 1 : 0);
    double s = 0.0;
    for (std::size_t k = 0; k < len; ++k) s += increments[pos + k];
    means[b] = s / static_cast<double>(len);
    pos += len;
  }
  double mean = 0.0;
  for (double m : means) mean += m;
  mean /= static_cast<double>(batches);
  double var = 0.0;
  for (double m : means) var += (m - mean) * (m - mean);
  var /= static_cast<double>(batches - 1);
  return std::sqrt(var / static_cast<double>(batches));
}

DiagonalProcess::DiagonalProcess(std::vector<DiagonalVector> per_state_table)
    : table_(std::move(per_state_table)) {
  if (table_.empty()) throw ValidationError("diagonal process: need at least one state");
  for (const auto& d : table_)
    if (d.size() != table_.front().size())
      throw ValidationError("diagonal process: all states must share the dimension");
}

const DiagonalVector& DiagonalProcess::at_state(std::size_t id) const {
  if (id >= table_.size()) throw ValidationError("diagonal process: state id out of range");
  return table_[id];
}

RandomMatrixSystem::RandomMatrixSystem(NonnegMatrix a, DiagonalProcess dmap,
                                       std::shared_ptr<const EnvironmentDriver> driver)
    : a_(std::move(a)), dmap_(std::move(dmap)), driver_(std::move(driver)) {
  if (!driver_) throw ValidationError("system: driver must not be null");
  if (dmap_.dim() != a_.dim())
    throw ValidationError("system: diagonal dimension must match matrix dimension");
  if (dmap_.state_count() != driver_->state_count())
    throw ValidationError("system: diagonal table must cover every driver state");
  steps_.reserve(dmap_.state_count());
  for (std::size_t s = 0; s < dmap_.state_count(); ++s)
    steps_.push_back(scale_columns(a_, dmap_.at_state(s)));
}

RandomMatrixSystem RandomMatrixSystem::perturbed(double epsilon) const {
  return RandomMatrixSystem(add_scaled_ones(a_, epsilon), dmap_, driver_);
}

ScaledProduct cocycle_product(const RandomMatrixSystem& sys, const EnvPath& path, std::int64_t n,
                              MatrixNorm norm) {
  if (n < 1) throw ValidationError("cocycle_product: n must be >= 1");
  WalkResult w = product_walk(sys, path, n, norm, nullptr);
  return ScaledProduct{NonnegMatrix(sys.dim(), std::move(w.unit)), w.logscale, norm};
}

LyapunovEstimate estimate_lyapunov_trajectory(const RandomMatrixSystem& sys, std::int64_t n,
                                              std::uint64_t seed, TrajectoryMode mode,
                                              MatrixNorm norm) {
  if (n < 1) throw ValidationError("estimate: n must be >= 1");
  LyapunovEstimate est;
  est.n = n;
  est.samples = 1;
  est.seed = seed;
  est.norm = norm;

  EnvPath path = sys.path(seed);
  std::vector<double> increments;

  if (mode == TrajectoryMode::Matrix) {
    est.method = EstimatorMethod::TrajectoryMatrix;
    WalkResult w = product_walk(sys, path, n, norm, &increments);
    if (w.zero) {
      est.value = kNegInf;
      est.stderr_est = 0.0;
      return est;
    }
    // Mean of the per-step growth increments, (1/n) ln(||S^(n)|| / ||I||):
    // same limit as (1/n) ln ||S^(n)|| but without the deterministic
    // identity-start offset (ln N)/(2n) that batch means cannot see.
    est.value = (w.logscale - w.initial_log) / static_cast<double>(n);
    est.stderr_est = batch_means_stderr(increments);
    return est;
  }

  MatrixClass cls = classify(sys.a());
  if (cls != MatrixClass::Positive && cls != MatrixClass::Primitive)
    throw ValidationError(
        "estimate: vector mode requires a primitive dispersal matrix; use matrix mode");
  est.method = EstimatorMethod::TrajectoryVector;
  const std::size_t dim = sys.dim();
  std::vector<double> v(dim, 1.0 / std::sqrt(static_cast<double>(dim))), next;
  increments.reserve(static_cast<std::size_t>(n));
  double total = 0.0;
  for (std::int64_t k = 0; k < n; ++k) {
    matvec(sys.step_matrix(path.state_at(k)), v, next);
    double nn = vec_norm2(next);
    double g = std::log(nn);
    increments.push_back(g);
    total += g;
    for (std::size_t i = 0; i < dim; ++i) v[i] = next[i] / nn;
  }
  est.value = total / static_cast<double>(n);
  est.stderr_est = batch_means_stderr(increments);
  return est;
}

LyapunovEstimate estimate_kingman_bound(const RandomMatrixSystem& sys, std::int64_t n,
                                        std::int64_t num_paths, std::uint64_t seed,
                                        MatrixNorm norm) {
  if (n < 1) throw ValidationError("kingman: n must be >= 1");
  if (num_paths < 1) throw ValidationError("kingman: num_paths must be >= 1");
  std::vector<double> values(static_cast<std::size_t>(num_paths));
  for (std::int64_t p = 0; p < num_paths; ++p) {
    EnvPath path = sys.path(substream(seed, static_cast<std::uint64_t>(p)));
    WalkResult w = product_walk(sys, path, n, norm, nullptr);
    values[static_cast<std::size_t>(p)] = w.logscale / static_cast<double>(n);
  }
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(num_paths);
  double var = 0.0;
  if (std::isfinite(mean)) {
    for (double v : values) var += (v - mean) * (v - mean);
    var = num_paths > 1 ? var / static_cast<double>(num_paths - 1) : 0.0;
  }
  LyapunovEstimate est;
  est.value = mean;
  est.method = EstimatorMethod::Kingman;
  est.n = n;
  est.samples = num_paths;
  est.stderr_est = std::isfinite(mean) ? std::sqrt(var / static_cast<double>(num_paths)) : 0.0;
  est.seed = seed;
  est.norm = norm;
  return est;
}

bool kingman_exact_feasible(const RandomMatrixSystem& sys, std::int64_t n) {
  if (sys.driver().kind() != DriverKind::IidFinite || n < 1) return false;
  double words = std::pow(static_cast<double>(sys.driver().state_count()),
                          static_cast<double>(n));
  return words <= 1e6;
}

LyapunovEstimate kingman_exact(const RandomMatrixSystem& sys, std::int64_t n, MatrixNorm norm) {
  if (!kingman_exact_feasible(sys, n))
    throw ValidationError(
        "kingman exact: requires an iid driver with state_count^n <= 1e6 words");
  const std::size_t dim = sys.dim();
  const std::size_t states = sys.driver().state_count();
  const std::vector<double>& p = sys.driver().stationary();

  // Depth-first over state words; partial products are shared along the
  // prefix tree, each level renormalized with its own log scale.
  double expectation = 0.0;
  bool hit_zero = false;
  std::vector<std::vector<double>> stack(static_cast<std::size_t>(n) + 1);
  std::vector<double> logs(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<double> weights(static_cast<std::size_t>(n) + 1, 1.0);
  stack[0].assign(dim * dim, 0.0);
  for (std::size_t i = 0; i < dim; ++i) stack[0][i * dim + i] = 1.0;
  double norm0 = buffer_norm(stack[0], dim, norm);
  for (double& x : stack[0]) x /= norm0;
  logs[0] = std::log(norm0);

  std::vector<std::size_t> word(static_cast<std::size_t>(n), 0);
  std::vector<double> scratch;
  std::int64_t level = 0;
  while (true) {
    if (level == n) {
      if (logs[static_cast<std::size_t>(n)] == kNegInf) {
        if (weights[static_cast<std::size_t>(n)] > 0.0) hit_zero = true;
      } else {
        expectation +=
            weights[static_cast<std::size_t>(n)] * logs[static_cast<std::size_t>(n)];
      }
      --level;
      ++word[static_cast<std::size_t>(level)];
    } else if (word[static_cast<std::size_t>(level)] == states) {
      word[static_cast<std::size_t>(level)] = 0;
      --level;
      if (level < 0) break;
      ++word[static_cast<std::size_t>(level)];
    } else {
      std::size_t s = word[static_cast<std::size_t>(level)];
      std::size_t l = static_cast<std::size_t>(level);
      if (logs[l] == kNegInf) {
        stack[l + 1] = stack[l];
        logs[l + 1] = kNegInf;
      } else {
        left_mul(sys.step_matrix(EnvState{s, 0.0}).entries(), stack[l], dim, scratch);
        double nn = buffer_norm(scratch, dim, norm);
        if (nn == 0.0) {
          logs[l + 1] = kNegInf;
          stack[l + 1].assign(dim * dim, 0.0);
        } else {
          stack[l + 1] = scratch;
          for (double& x : stack[l + 1]) x /= nn;
          logs[l + 1] = logs[l] + std::log(nn);
        }
      }
      weights[l + 1] = weights[l] * p[s];
      ++level;
    }
  }

  LyapunovEstimate est;
  est.value = hit_zero ? kNegInf : expectation / static_cast<double>(n);
  est.method = EstimatorMethod::Kingman;
  est.n = n;
  est.samples = static_cast<std::int64_t>(std::pow(static_cast<double>(states),
                                                   static_cast<double>(n)));
  est.stderr_est = 0.0;
  est.seed = 0;
  est.norm = norm;
  return est;
}

TrajectorySeries trajectory_series(const RandomMatrixSystem& sys, std::int64_t n,
                                   std::uint64_t seed, TrajectoryMode mode, MatrixNorm norm,
                                   std::int64_t max_points) {
  if (n < 1) throw ValidationError("trajectory_series: n must be >= 1");
  const std::size_t dim = sys.dim();
  EnvPath path = sys.path(seed);
  std::vector<double> increments;

  if (mode == TrajectoryMode::Matrix) {
    product_walk(sys, path, n, norm, &increments);
  } else {
    MatrixClass cls = classify(sys.a());
    if (cls != MatrixClass::Positive && cls != MatrixClass::Primitive)
      throw ValidationError(
          "trajectory_series: vector mode requires a primitive dispersal matrix");
    std::vector<double> v(dim, 1.0 / std::sqrt(static_cast<double>(dim))), next;
    increments.reserve(static_cast<std::size_t>(n));
    for (std::int64_t k = 0; k < n; ++k) {
      matvec(sys.step_matrix(path.state_at(k)), v, next);
      double nn = vec_norm2(next);
      increments.push_back(std::log(nn));
      for (std::size_t i = 0; i < dim; ++i) v[i] = next[i] / nn;
    }
  }

  TrajectorySeries series;
  std::int64_t stride = std::max<std::int64_t>(1, n / max_points);
  double acc = 0.0;
  for (std::int64_t k = 0; k < static_cast<std::int64_t>(increments.size()); ++k) {
    acc += increments[static_cast<std::size_t>(k)];
    if ((k + 1) % stride == 0 || k + 1 == n) {
      series.ns.push_back(k + 1);
      series.running.push_back(acc / static_cast<double>(k + 1));
    }
    if (increments[static_cast<std::size_t>(k)] == kNegInf) break;
  }
  return series;
}

BestOfResult lyapunov_bestof(const RandomMatrixSystem& sys, std::int64_t budget,
                             std::uint64_t seed) {
  if (budget < 10) throw ValidationError("bestof: budget must allow at least 10 multiplies");
  BestOfResult out;
  std::int64_t n_traj = std::max<std::int64_t>(1, (budget * 4) / 5);
  out.estimate = estimate_lyapunov_trajectory(sys, n_traj, seed, TrajectoryMode::Matrix);

  // Exact Kingman upper bounds at small n where enumeration is feasible,
  // otherwise a sampled bound; the trajectory value must stay below them.
  std::int64_t reserve = budget - n_traj;
  std::vector<std::int64_t> ns = {1, 2, 4, 8};
  for (std::int64_t n : ns) {
    if (kingman_exact_feasible(sys, n)) {
      std::int64_t cost = static_cast<std::int64_t>(
          std::pow(static_cast<double>(sys.driver().state_count()), static_cast<double>(n)) *
          static_cast<double>(n));
      if (cost <= reserve) {
        out.kingman_refs.push_back(kingman_exact(sys, n));
        reserve -= cost;
      }
    }
  }
  if (out.kingman_refs.empty() && reserve >= 64) {
    std::int64_t paths = std::min<std::int64_t>(64, reserve / 8);
    out.kingman_refs.push_back(estimate_kingman_bound(sys, 8, paths, substream(seed, 777)));
  }

  for (const auto& ref : out.kingman_refs) {
    double slack = 3.0 * (out.estimate.stderr_est + ref.stderr_est);
    if (out.estimate.value > ref.value + slack) out.consistent = false;
  }
  return out;
}

}  // namespace rms
