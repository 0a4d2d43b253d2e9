#include "rms/principal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rms {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_positive(const NonnegMatrix& a, const char* who) {
  if (classify(a) != MatrixClass::Positive)
    throw ValidationError(std::string(who) +
                          ": requires a strictly positive dispersal matrix");
}

double vec_norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

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

// Depth at which tau^depth * Delta(A) <= tol / (10 * scale); `scale` covers
// the amplification of a projective error into the Euclidean residual by
// ||S(omega)||.
std::int64_t depth_for_tolerance(const RandomMatrixSystem& sys, double tol,
                                 const PrincipalOptions& opts) {
  double delta = projective_diameter(sys.a());
  double tau = birkhoff_contraction(sys.a());
  double scale = 1.0;
  for (std::size_t s = 0; s < sys.dmap().state_count(); ++s)
    scale = std::max(scale, matrix_norm(sys.step_matrix(EnvState{s, 0.0})));
  double target = tol / (10.0 * scale);
  std::int64_t depth = opts.min_depth;
  if (delta > 0.0 && tau > 0.0 && target < delta) {
    double steps = std::ceil(std::log(target / delta) / std::log(tau));
    depth = std::max<std::int64_t>(depth, static_cast<std::int64_t>(steps) + 1);
  }
  return std::min(depth, opts.max_depth);
}

}  // namespace

double projective_diameter(const NonnegMatrix& a) {
  require_positive(a, "projective_diameter");
  const std::size_t n = a.dim();
  double best = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k)
        for (std::size_t l = 0; l < n; ++l)
          best = std::max(best, std::log((a(i, k) * a(j, l)) / (a(j, k) * a(i, l))));
  return best;
}

double birkhoff_contraction(const NonnegMatrix& a) {
  return std::tanh(projective_diameter(a) / 4.0);
}

std::vector<double> principal_pullback(const RandomMatrixSystem& sys, const EnvPath& path,
                                       std::int64_t at_index, std::int64_t depth) {
  const std::size_t n = sys.dim();
  std::vector<double> v(n, 1.0 / std::sqrt(static_cast<double>(n))), next;
  for (std::int64_t k = at_index - depth; k < at_index; ++k) {
    matvec(sys.step_matrix(path.state_at(k)), v, next);
    double nn = vec_norm2(next);
    for (std::size_t i = 0; i < n; ++i) v[i] = next[i] / nn;
  }
  return v;
}

double hilbert_distance(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.empty())
    throw ValidationError("hilbert_distance: dimension mismatch");
  double max_ratio = -kInf, min_ratio = kInf;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] <= 0.0 || y[i] <= 0.0)
      throw ValidationError("hilbert_distance: vectors must be strictly positive");
    double r = std::log(x[i] / y[i]);
    max_ratio = std::max(max_ratio, r);
    min_ratio = std::min(min_ratio, r);
  }
  return max_ratio - min_ratio;
}

PrincipalPair principal_pair(const RandomMatrixSystem& sys, const EnvPath& path,
                             std::int64_t at_index, const PrincipalOptions& opts) {
  require_positive(sys.a(), "principal_pair");
  const std::size_t dim = sys.dim();

  std::int64_t depth = depth_for_tolerance(sys, opts.tol, opts);
  for (;; depth *= 2) {
    depth = std::min(depth, opts.max_depth);
    std::vector<double> w = principal_pullback(sys, path, at_index, depth);
    std::vector<double> w_next = principal_pullback(sys, path, at_index + 1, depth);

    std::vector<double> sw;
    matvec(sys.step_matrix(path.state_at(at_index)), w, sw);
    double rho = vec_norm2(sw);
    double res = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      double diff = sw[i] - rho * w_next[i];
      res += diff * diff;
    }
    res = std::sqrt(res);

    if (res <= opts.tol)
      return PrincipalPair{std::move(w), rho, res, depth};
    if (depth >= opts.max_depth)
      throw NotConvergedError("principal_pair: residual above tol at the pull-back depth cap");
  }
}

LyapunovEstimate lambda_from_rho(const RandomMatrixSystem& sys, const EnvPath& path,
                                 std::int64_t n, const PrincipalOptions& opts) {
  require_positive(sys.a(), "lambda_from_rho");
  if (n < 1) throw ValidationError("lambda_from_rho: n must be >= 1");
  const std::size_t dim = sys.dim();

  PrincipalPair start = principal_pair(sys, path, 0, opts);
  std::vector<double> w = start.w, next;
  std::vector<double> increments;
  increments.reserve(static_cast<std::size_t>(n));
  double total = 0.0;
  for (std::int64_t k = 0; k < n; ++k) {
    matvec(sys.step_matrix(path.state_at(k)), w, next);
    double rho = vec_norm2(next);
    double g = std::log(rho);
    increments.push_back(g);
    total += g;
    for (std::size_t i = 0; i < dim; ++i) w[i] = next[i] / rho;
  }

  LyapunovEstimate est;
  est.value = total / static_cast<double>(n);
  est.method = EstimatorMethod::TrajectoryVector;
  est.n = n;
  est.samples = 1;
  est.seed = path.seed();
  est.stderr_est = batch_means_stderr(increments);
  return est;
}

BoundCheckResult integrability_bound_check(const NonnegMatrix& a,
                                           const std::vector<PrincipalPair>& pairs) {
  require_positive(a, "integrability_bound_check");
  ColumnStats cs = column_stats(a, DiagonalVector(std::vector<double>(a.dim(), 1.0)));
  double bound = 1.0 / (std::sqrt(static_cast<double>(a.dim())) * cs.kappa);
  BoundCheckResult r;
  r.worst_margin = kInf;
  for (const auto& pair : pairs) {
    double wmin = kInf;
    for (double x : pair.w) wmin = std::min(wmin, x);
    r.worst_margin = std::min(r.worst_margin, wmin - bound);
  }
  r.holds = r.worst_margin >= -1e-12;
  return r;
}

CesaroTrace cesaro_proof_trace(const RandomMatrixSystem& sys, const EnvPath& path, std::int64_t n,
                               const PrincipalOptions& opts) {
  require_positive(sys.a(), "cesaro_proof_trace");
  if (n < 1) throw ValidationError("cesaro_proof_trace: n must be >= 1");
  const std::size_t dim = sys.dim();
  const std::size_t un = static_cast<std::size_t>(n);

  CesaroTrace tr;
  tr.n = n;
  tr.dim = dim;
  tr.w.assign((un + 1) * dim, 0.0);
  tr.rho.assign(un, 0.0);
  tr.d.assign(un * dim, 0.0);

  PrincipalPair start = principal_pair(sys, path, 0, opts);
  std::copy(start.w.begin(), start.w.end(), tr.w.begin());

  // Forward recursion; w(k+1) = S(theta^k omega) w(k) / rho(k), which makes
  // the step identity (a) hold by construction up to rounding.
  std::vector<double> cur = start.w, next;
  for (std::int64_t k = 0; k < n; ++k) {
    const EnvState s = path.state_at(k);
    const DiagonalVector& dk = sys.dmap().at_state(s.id);
    for (std::size_t i = 0; i < dim; ++i) tr.d[static_cast<std::size_t>(k) * dim + i] = dk[i];
    matvec(sys.step_matrix(s), cur, next);
    double rho = vec_norm2(next);
    tr.rho[static_cast<std::size_t>(k)] = rho;
    for (std::size_t i = 0; i < dim; ++i) {
      cur[i] = next[i] / rho;
      tr.w[(static_cast<std::size_t>(k) + 1) * dim + i] = cur[i];
    }
  }

  // Prefix sums of logs drive all the Cesaro means; computing w^ from the
  // same sums keeps identity (c) an algebraic rearrangement.
  std::vector<double> logw_prefix((un + 1) * dim, 0.0);  // sum_{k<m} ln w_i(k)
  std::vector<double> logd_prefix((un + 1) * dim, 0.0);
  std::vector<double> logrho_prefix(un + 1, 0.0);
  for (std::size_t m = 0; m < un; ++m) {
    for (std::size_t i = 0; i < dim; ++i) {
      logw_prefix[(m + 1) * dim + i] = logw_prefix[m * dim + i] + std::log(tr.w[m * dim + i]);
      logd_prefix[(m + 1) * dim + i] = logd_prefix[m * dim + i] + std::log(tr.d[m * dim + i]);
    }
    logrho_prefix[m + 1] = logrho_prefix[m] + std::log(tr.rho[m]);
  }

  tr.max_step_identity_error = 0.0;
  tr.min_prefix_margin = kInf;
  tr.max_mean_identity_error = 0.0;
  tr.ok = true;

  // (a) step identity at every k.
  for (std::size_t k = 0; k < un; ++k) {
    for (std::size_t i = 0; i < dim; ++i) {
      double lhs = tr.w[(k + 1) * dim + i] * tr.rho[k];
      double rhs = 0.0;
      for (std::size_t j = 0; j < dim; ++j)
        rhs += sys.a()(i, j) * tr.d[k * dim + j] * tr.w[k * dim + j];
      double err = std::abs(lhs - rhs) / std::max(std::abs(rhs), 1e-300);
      tr.max_step_identity_error = std::max(tr.max_step_identity_error, err);
      if (err > 1e-10 && tr.ok) {
        tr.ok = false;
        tr.failure = "step identity violated at k=" + std::to_string(k) +
                     ", i=" + std::to_string(i) + ", relative error " + std::to_string(err);
      }
    }
  }

  // (b),(c) at every prefix m.
  std::vector<double> wt(dim), wh(dim), dt(dim);
  for (std::size_t m = 1; m <= un; ++m) {
    double inv_m = 1.0 / static_cast<double>(m);
    double rho_t = std::exp(logrho_prefix[m] * inv_m);
    for (std::size_t i = 0; i < dim; ++i) {
      wt[i] = std::exp(logw_prefix[m * dim + i] * inv_m);
      // shifted window [1, m]: drop ln w(0), add ln w(m)
      wh[i] = std::exp((logw_prefix[m * dim + i] - std::log(tr.w[i]) +
                        std::log(tr.w[m * dim + i])) *
                       inv_m);
      dt[i] = std::exp(logd_prefix[m * dim + i] * inv_m);
    }
    for (std::size_t i = 0; i < dim; ++i) {
      double lhs = 0.0;
      for (std::size_t j = 0; j < dim; ++j) lhs += sys.a()(i, j) * dt[j] * wt[j];
      double rhs = rho_t * wh[i];
      double margin = (rhs - lhs) / rhs;
      tr.min_prefix_margin = std::min(tr.min_prefix_margin, margin);
      if (margin < -1e-10 && tr.ok) {
        tr.ok = false;
        tr.failure = "Cesaro inequality violated at prefix m=" + std::to_string(m) +
                     ", i=" + std::to_string(i) + ", lhs=" + std::to_string(lhs) +
                     ", rhs=" + std::to_string(rhs);
      }
      double ident = std::abs(wh[i] / wt[i] -
                              std::exp(inv_m * (std::log(tr.w[m * dim + i]) -
                                                std::log(tr.w[i]))));
      tr.max_mean_identity_error = std::max(tr.max_mean_identity_error, ident);
    }
    if (m == un) {
      tr.w_tilde.assign(wt.begin(), wt.end());
      tr.w_hat.assign(wh.begin(), wh.end());
      tr.d_tilde.assign(dt.begin(), dt.end());
      tr.rho_tilde = rho_t;
    }
  }

  // (d) the subinvariance conclusion: A D~(n) w~(n) <= rho~(n) w^(n); folded
  // into the one-vector form C w~ <= (rho~ max_i w^_i/w~_i) w~ so the test
  // certifies a spectral radius bound for the prefix-averaged matrix.
  double ratio_max = 0.0;
  for (std::size_t i = 0; i < dim; ++i) ratio_max = std::max(ratio_max, tr.w_hat[i] / tr.w_tilde[i]);
  NonnegMatrix ad_tilde = scale_columns(sys.a(), DiagonalVector(tr.d_tilde));
  tr.subinvariance =
      check_subinvariance(ad_tilde, tr.w_tilde, tr.rho_tilde * ratio_max, 1e-9);
  if (!tr.subinvariance.holds && tr.ok) {
    tr.ok = false;
    tr.failure = "subinvariance of the averaged system failed at n";
  }

  return tr;
}

}  // namespace rms
