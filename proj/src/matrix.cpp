#include "rms/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace rms {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double frobenius(const std::vector<double>& a) {
  double s = 0.0;
  for (double x : a) s += x * x;
  return std::sqrt(s);
}

void square_into(const std::vector<double>& u, std::size_t n, std::vector<double>& out) {
  out.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      double uik = u[i * n + k];
      if (uik == 0.0) continue;
      const double* row = &u[k * n];
      double* dst = &out[i * n];
      for (std::size_t j = 0; j < n; ++j) dst[j] += uik * row[j];
    }
}

// Collatz-Wielandt lower bound on rho(U + delta I) via power iteration with
// a strictly positive start; min_i (Mv)_i / v_i <= rho(M) holds for every
// positive v and nonnegative M, so each sweep yields a valid bound and we
// keep the best. The diagonal shift makes the iteration converge even for
// irreducible matrices with several peripheral eigenvalues.
double cw_lower_shifted(const std::vector<double>& u, std::size_t n, double delta, int sweeps) {
  std::vector<double> v(n, 1.0 / std::sqrt(static_cast<double>(n))), w(n);
  double best = 0.0;
  for (int t = 0; t < sweeps; ++t) {
    double ratio_min = kInf, norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double s = delta * v[i];
      const double* row = &u[i * n];
      for (std::size_t j = 0; j < n; ++j) s += row[j] * v[j];
      w[i] = s;
      ratio_min = std::min(ratio_min, s / v[i]);
      norm += s * s;
    }
    best = std::max(best, ratio_min);
    norm = std::sqrt(norm);
    if (norm == 0.0) break;
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / norm;
  }
  return best;
}

std::vector<char> bool_square(const std::vector<char>& u, std::size_t n) {
  std::vector<char> out(n * n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k)
      if (u[i * n + k])
        for (std::size_t j = 0; j < n; ++j)
          if (u[k * n + j]) out[i * n + j] = 1;
  return out;
}

std::vector<char> bool_mul(const std::vector<char>& x, const std::vector<char>& y, std::size_t n) {
  std::vector<char> out(n * n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k)
      if (x[i * n + k])
        for (std::size_t j = 0; j < n; ++j)
          if (y[k * n + j]) out[i * n + j] = 1;
  return out;
}

bool all_positive(const std::vector<char>& b) {
  return std::all_of(b.begin(), b.end(), [](char c) { return c != 0; });
}

bool strongly_connected_pattern(const std::vector<char>& adj, std::size_t n) {
  auto reach = [&](bool transpose) {
    std::vector<char> seen(n, 0);
    std::vector<std::size_t> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      std::size_t u = stack.back();
      stack.pop_back();
      for (std::size_t v = 0; v < n; ++v) {
        char e = transpose ? adj[v * n + u] : adj[u * n + v];
        if (e && !seen[v]) {
          seen[v] = 1;
          stack.push_back(v);
        }
      }
    }
    return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
  };
  return reach(false) && reach(true);
}

}  // namespace

NonnegMatrix::NonnegMatrix(std::size_t n, std::vector<double> entries) : n_(n), a_(std::move(entries)) {
  if (n == 0) throw ValidationError("matrix: dimension must be >= 1");
  if (a_.size() != n * n) throw ValidationError("matrix: entry count does not match dimension");
  for (double x : a_)
    if (!std::isfinite(x) || x < 0.0)
      throw ValidationError("matrix: entries must be finite and >= 0");
}

NonnegMatrix NonnegMatrix::identity(std::size_t n) {
  std::vector<double> e(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) e[i * n + i] = 1.0;
  return NonnegMatrix(n, std::move(e));
}

NonnegMatrix NonnegMatrix::ones(std::size_t n) {
  return NonnegMatrix(n, std::vector<double>(n * n, 1.0));
}

NonnegMatrix NonnegMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  std::size_t n = rows.size();
  if (n == 0) throw ValidationError("matrix: dimension must be >= 1");
  std::vector<double> e;
  e.reserve(n * n);
  for (const auto& r : rows) {
    if (r.size() != n) throw ValidationError("matrix: rows must form a square matrix");
    e.insert(e.end(), r.begin(), r.end());
  }
  return NonnegMatrix(n, std::move(e));
}

DiagonalVector::DiagonalVector(std::vector<double> d) : d_(std::move(d)) {
  if (d_.empty()) throw ValidationError("diagonal: dimension must be >= 1");
  for (double x : d_)
    if (!std::isfinite(x) || x <= 0.0)
      throw ValidationError("diagonal: entries must be finite and > 0 (positive fitness diagonal)");
}

NonnegMatrix matmul(const NonnegMatrix& x, const NonnegMatrix& y) {
  if (x.dim() != y.dim()) throw ValidationError("matmul: dimension mismatch");
  const std::size_t n = x.dim();
  std::vector<double> out(n * n, 0.0);
  const auto& a = x.entries();
  const auto& b = y.entries();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      double aik = a[i * n + k];
      if (aik == 0.0) continue;
      const double* row = &b[k * n];
      double* dst = &out[i * n];
      for (std::size_t j = 0; j < n; ++j) dst[j] += aik * row[j];
    }
  return NonnegMatrix(n, std::move(out));
}

NonnegMatrix transpose(const NonnegMatrix& x) {
  const std::size_t n = x.dim();
  std::vector<double> out(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out[j * n + i] = x(i, j);
  return NonnegMatrix(n, std::move(out));
}

NonnegMatrix add_scaled_ones(const NonnegMatrix& x, double epsilon) {
  if (!(epsilon >= 0.0)) throw ValidationError("perturbation: epsilon must be >= 0");
  const std::size_t n = x.dim();
  std::vector<double> out = x.entries();
  for (double& v : out) v += epsilon;
  return NonnegMatrix(n, std::move(out));
}

NonnegMatrix scale_columns(const NonnegMatrix& a, const DiagonalVector& d) {
  if (a.dim() != d.size()) throw ValidationError("scale_columns: dimension mismatch");
  const std::size_t n = a.dim();
  std::vector<double> out(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = a(i, j) * d[j];
  return NonnegMatrix(n, std::move(out));
}

double matrix_norm(const NonnegMatrix& x, MatrixNorm which) {
  if (which == MatrixNorm::Frobenius) return frobenius(x.entries());
  // operator-2 norm as sqrt(rho(X^T X)); X^T X is symmetric nonnegative so
  // the bracket closes geometrically.
  NonnegMatrix gram = matmul(transpose(x), x);
  double scale = frobenius(gram.entries());
  if (scale == 0.0) return 0.0;
  SpectralBracket b = spectral_radius(gram, 1e-13 * scale);
  return std::sqrt(b.midpoint());
}

MatrixClass classify(const NonnegMatrix& a) {
  const std::size_t n = a.dim();
  std::vector<char> adj(n * n);
  bool positive = true;
  for (std::size_t i = 0; i < n * n; ++i) {
    adj[i] = a.entries()[i] > 0.0 ? 1 : 0;
    positive = positive && adj[i];
  }
  if (positive) return MatrixClass::Positive;
  if (!strongly_connected_pattern(adj, n) || (n == 1 && !adj[0]))
    return MatrixClass::Reducible;
  // Wielandt: an irreducible pattern is primitive iff its ((n-1)^2 + 1)-th
  // boolean power is all ones. Computed by binary exponentiation.
  std::size_t m = (n - 1) * (n - 1) + 1;
  std::vector<char> acc, base = adj;
  bool acc_set = false;
  while (m > 0) {
    if (m & 1) {
      acc = acc_set ? bool_mul(acc, base, n) : base;
      acc_set = true;
    }
    m >>= 1;
    if (m > 0) base = bool_square(base, n);
  }
  return all_positive(acc) ? MatrixClass::Primitive : MatrixClass::Irreducible;
}

SpectralBracket spectral_radius(const NonnegMatrix& c, double tol) {
  if (!(tol > 0.0)) throw ValidationError("spectral_radius: tol must be > 0");
  const std::size_t n = c.dim();
  SpectralBracket out;

  double norm0 = frobenius(c.entries());
  if (norm0 == 0.0) {
    out.converged = true;
    return out;  // zero matrix, rho = 0 exactly
  }

  std::vector<double> unit(n * n);
  for (std::size_t i = 0; i < n * n; ++i) unit[i] = c.entries()[i] / norm0;
  double logscale = std::log(norm0);  // ||C^(2^k)|| = exp(logscale)
  double power = 1.0;                 // 2^k

  // Symmetric input: the diagonal bound alone closes geometrically, so the
  // Collatz-Wielandt refinement is skipped.
  bool symmetric = true;
  for (std::size_t i = 0; i < n && symmetric; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (c(i, j) != c(j, i)) {
        symmetric = false;
        break;
      }

  double lower = 0.0, upper = kInf;
  std::vector<double> squared;
  for (int k = 0; k <= 64; ++k) {
    upper = std::min(upper, std::exp(logscale / power));

    double diag_max = 0.0;
    for (std::size_t i = 0; i < n; ++i) diag_max = std::max(diag_max, unit[i * n + i]);
    if (diag_max > 0.0)
      lower = std::max(lower, std::exp((logscale + std::log(diag_max)) / power));

    if (!symmetric) {
      const double delta = 1e-2;
      double cw = cw_lower_shifted(unit, n, delta, 48);
      if (cw > delta)
        lower = std::max(lower, std::exp((logscale + std::log(cw - delta)) / power));
    }

    out.lower = lower;
    out.upper = upper;
    out.iterations = k;
    if (upper - lower <= tol) {
      out.converged = true;
      return out;
    }
    if (k == 64) break;

    square_into(unit, n, squared);
    double nw = frobenius(squared);
    if (nw == 0.0) {
      // C^(2^(k+1)) = 0: C is nilpotent, rho = 0 exactly.
      out.lower = 0.0;
      out.upper = 0.0;
      out.iterations = k + 1;
      out.converged = true;
      return out;
    }
    for (std::size_t i = 0; i < n * n; ++i) unit[i] = squared[i] / nw;
    logscale = 2.0 * logscale + std::log(nw);
    power *= 2.0;
  }
  out.converged = false;
  return out;
}

ColumnStats column_stats(const NonnegMatrix& a, const DiagonalVector& d) {
  if (a.dim() != d.size()) throw ValidationError("column_stats: dimension mismatch");
  const std::size_t n = a.dim();
  ColumnStats s;
  s.col_min.resize(n);
  s.col_max.resize(n);
  double kappa = 1.0;
  bool finite = true;
  for (std::size_t i = 0; i < n; ++i) {
    double cmin = kInf, cmax = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      cmin = std::min(cmin, a(j, i));
      cmax = std::max(cmax, a(j, i));
    }
    s.col_min[i] = d[i] * cmin;
    s.col_max[i] = d[i] * cmax;
    s.global_max = std::max(s.global_max, s.col_max[i]);
    if (cmin == 0.0) {
      finite = false;  // kappa is finite only for strictly positive A
    } else {
      kappa = std::max(kappa, cmax / cmin);
    }
  }
  s.kappa = finite ? kappa : kInf;
  s.kappa_finite = finite;
  return s;
}

SubinvarianceResult check_subinvariance(const NonnegMatrix& c, const std::vector<double>& w,
                                        double mu, double tol) {
  const std::size_t n = c.dim();
  if (w.size() != n) throw ValidationError("check_subinvariance: dimension mismatch");
  for (double x : w)
    if (!std::isfinite(x) || x <= 0.0)
      throw ValidationError("check_subinvariance: w must be strictly positive");
  if (!(mu > 0.0)) throw ValidationError("check_subinvariance: mu must be > 0");

  SubinvarianceResult r;
  r.margin = kInf;
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += c(i, j) * w[j];
    r.margin = std::min(r.margin, mu * w[i] - s);
  }
  r.holds = r.margin >= -tol;
  return r;
}

}  // namespace rms
