#ifndef RMS_MATRIX_HPP
#define RMS_MATRIX_HPP

#include <cstddef>
#include <vector>

#include "rms/errors.hpp"

namespace rms {

// Dense square matrix with nonnegative finite entries, row-major.
// Immutable after construction; all operations below are pure.
class NonnegMatrix {
 public:
  explicit NonnegMatrix(std::size_t n) : n_(n), a_(n * n, 0.0) {
    if (n == 0) throw ValidationError("matrix: dimension must be >= 1");
  }
  NonnegMatrix(std::size_t n, std::vector<double> entries);
  static NonnegMatrix identity(std::size_t n);
  static NonnegMatrix ones(std::size_t n);
  static NonnegMatrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t dim() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }
  const std::vector<double>& entries() const { return a_; }

 private:
  std::size_t n_;
  std::vector<double> a_;
};

// Positive diagonal (the per-patch fitnesses d_i).
class DiagonalVector {
 public:
  explicit DiagonalVector(std::vector<double> d);
  std::size_t size() const { return d_.size(); }
  double operator[](std::size_t i) const { return d_[i]; }
  const std::vector<double>& values() const { return d_; }

 private:
  std::vector<double> d_;
};

// Columnwise extremes of S = A D and the column-ratio constant kappa.
// m_c[i] = d_i min_j a_ji, M_c[i] = d_i max_j a_ji; kappa depends on A only
// and is finite exactly when no column of A contains a zero.
struct ColumnStats {
  std::vector<double> col_min;  // m_c
  std::vector<double> col_max;  // M_c
  double global_max = 0.0;      // M
  double kappa = 0.0;
  bool kappa_finite = true;
};

// Two-sided enclosure of a spectral radius. lower <= rho <= upper always;
// converged means upper - lower met the requested tolerance.
struct SpectralBracket {
  double lower = 0.0;
  double upper = 0.0;
  int iterations = 0;
  bool converged = false;
  double midpoint() const { return 0.5 * (lower + upper); }
  double width() const { return upper - lower; }
};

enum class MatrixNorm { Frobenius, Operator2 };
enum class MatrixClass { Positive, Primitive, Irreducible, Reducible };

NonnegMatrix matmul(const NonnegMatrix& x, const NonnegMatrix& y);
NonnegMatrix transpose(const NonnegMatrix& x);
NonnegMatrix add_scaled_ones(const NonnegMatrix& x, double epsilon);  // A + eps*B

// Column scaling: result[i][j] = a[i][j] * d[j], i.e. the product A D.
NonnegMatrix scale_columns(const NonnegMatrix& a, const DiagonalVector& d);

double matrix_norm(const NonnegMatrix& x, MatrixNorm which = MatrixNorm::Frobenius);

// Exact structural classification by boolean arithmetic on the zero pattern.
// positive => primitive => irreducible; primitivity is decided at the
// Wielandt exponent (n-1)^2 + 1.
MatrixClass classify(const NonnegMatrix& a);

// Gelfand bracket by repeated squaring: after k squarings the Frobenius norm
// of C^(2^k) gives the upper bound ||C^(2^k)||^(1/2^k) and the diagonal plus
// a Collatz-Wielandt bound on a diagonally shifted iterate give the lower.
// Squared iterates are kept at unit norm with the log scale carried
// separately. Never returns a wrong point value: a bracket that fails to
// close within 64 squarings comes back with converged = false.
SpectralBracket spectral_radius(const NonnegMatrix& c, double tol = 1e-10);

ColumnStats column_stats(const NonnegMatrix& a, const DiagonalVector& d);

struct SubinvarianceResult {
  bool holds = false;
  double margin = 0.0;  // min_i (mu w_i - (Cw)_i); >= -tol when holds
};

// Tests C w <= mu w + tol coordinatewise for strictly positive w. A true
// result certifies rho(C) <= mu up to the tol slack (Birkhoff-Pinkus
// subinvariance), which the test suite checks against the bracket.
SubinvarianceResult check_subinvariance(const NonnegMatrix& c, const std::vector<double>& w,
                                        double mu, double tol);

}  // namespace rms

#endif  // RMS_MATRIX_HPP
