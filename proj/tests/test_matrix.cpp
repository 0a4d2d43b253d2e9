#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rms/matrix.hpp"
#include "oracles.hpp"

using namespace rms;

TEST_CASE("construction validates nonnegativity and shape") {
  CHECK_THROWS_AS(NonnegMatrix(2, {1.0, -0.5, 0.0, 1.0}), ValidationError);
  CHECK_THROWS_AS(NonnegMatrix(2, {1.0, 0.5, 0.0}), ValidationError);
  CHECK_THROWS_AS(DiagonalVector({1.0, 0.0}), ValidationError);
  CHECK_THROWS_AS(DiagonalVector({1.0, -2.0}), ValidationError);
}

TEST_CASE("matmul basics") {
  auto x = NonnegMatrix::from_rows({{1.0, 2.0}, {3.0, 4.0}});
  auto xi = matmul(x, NonnegMatrix::identity(2));
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) CHECK(xi(i, j) == x(i, j));

  auto perm = NonnegMatrix::from_rows({{0.0, 1.0}, {1.0, 0.0}});
  auto sq = matmul(perm, perm);
  CHECK(sq(0, 0) == 1.0);
  CHECK(sq(0, 1) == 0.0);
  CHECK(sq(1, 1) == 1.0);

  auto ones2 = matmul(NonnegMatrix::ones(2), NonnegMatrix::ones(2));
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) CHECK(ones2(i, j) == 2.0);
}

TEST_CASE("scale_columns realizes A D") {
  auto a = NonnegMatrix::from_rows({{0.0, 1.0}, {1.0, 0.0}});
  auto ad = scale_columns(a, DiagonalVector({2.0, 3.0}));
  CHECK(ad(0, 1) == 3.0);
  CHECK(ad(1, 0) == 2.0);
  CHECK(ad(0, 0) == 0.0);

  auto same = scale_columns(a, DiagonalVector({1.0, 1.0}));
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) CHECK(same(i, j) == a(i, j));

  auto od = scale_columns(NonnegMatrix::ones(2), DiagonalVector({1.0, 4.0}));
  CHECK(od(0, 0) == 1.0);
  CHECK(od(0, 1) == 4.0);
  CHECK(od(1, 0) == 1.0);
  CHECK(od(1, 1) == 4.0);
}

TEST_CASE("matrix norms on the pinned examples") {
  auto id = NonnegMatrix::identity(2);
  CHECK(matrix_norm(id, MatrixNorm::Frobenius) == doctest::Approx(std::sqrt(2.0)));
  CHECK(matrix_norm(id, MatrixNorm::Operator2) == doctest::Approx(1.0).epsilon(1e-10));

  CHECK(matrix_norm(NonnegMatrix::ones(2), MatrixNorm::Operator2) ==
        doctest::Approx(2.0).epsilon(1e-10));

  auto anti = NonnegMatrix::from_rows({{0.0, 3.0}, {2.0, 0.0}});
  CHECK(matrix_norm(anti, MatrixNorm::Operator2) == doctest::Approx(3.0).epsilon(1e-10));
}

TEST_CASE("classify on the pinned examples") {
  CHECK(classify(NonnegMatrix::ones(3)) == MatrixClass::Positive);
  CHECK(classify(NonnegMatrix::from_rows({{0.0, 1.0}, {1.0, 0.0}})) == MatrixClass::Irreducible);
  CHECK(classify(NonnegMatrix::from_rows({{1.0, 1.0}, {0.0, 1.0}})) == MatrixClass::Reducible);
  CHECK(classify(NonnegMatrix::from_rows({{1.0, 1.0}, {1.0, 0.0}})) == MatrixClass::Primitive);
  CHECK(classify(NonnegMatrix(1, {0.0})) == MatrixClass::Reducible);
  CHECK(classify(NonnegMatrix(1, {2.0})) == MatrixClass::Positive);
  // 3-cycle: irreducible with period 3
  CHECK(classify(NonnegMatrix::from_rows({{0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}, {1.0, 0.0, 0.0}})) ==
        MatrixClass::Irreducible);
}

TEST_CASE("spectral_radius on the pinned examples") {
  auto id = spectral_radius(NonnegMatrix::identity(2), 1e-10);
  CHECK(id.converged);
  CHECK(id.lower <= 1.0);
  CHECK(id.upper >= 1.0);
  CHECK(id.width() <= 1e-10);

  auto anti = spectral_radius(NonnegMatrix::from_rows({{0.0, 2.0}, {3.0, 0.0}}), 1e-10);
  CHECK(anti.converged);
  CHECK(anti.midpoint() == doctest::Approx(std::sqrt(6.0)).epsilon(1e-9));

  auto tri = spectral_radius(NonnegMatrix::from_rows({{1.0, 1.0}, {0.0, 1.0}}), 1e-8);
  CHECK(tri.converged);
  CHECK(tri.midpoint() == doctest::Approx(1.0).epsilon(1e-7));

  auto zero = spectral_radius(NonnegMatrix(3), 1e-12);
  CHECK(zero.converged);
  CHECK(zero.upper == 0.0);

  auto nil = spectral_radius(NonnegMatrix::from_rows({{0.0, 1.0}, {0.0, 0.0}}), 1e-12);
  CHECK(nil.converged);
  CHECK(nil.upper == 0.0);

  // weighted 3-cycle with rho = (2 * 3 * 1/6)^(1/3) = 1: the hard
  // irreducible non-primitive case
  auto cyc = spectral_radius(
      NonnegMatrix::from_rows({{0.0, 2.0, 0.0}, {0.0, 0.0, 3.0}, {1.0 / 6.0, 0.0, 0.0}}), 1e-8);
  CHECK(cyc.converged);
  CHECK(cyc.midpoint() == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("bracket soundness against the characteristic polynomial oracle") {
  int checked = 0;
  for (std::uint64_t s = 0; s < 300; ++s) {
    std::size_t n = 1 + static_cast<std::size_t>(uniform01(s, 900) * 4.0);
    if (n > 4) n = 4;
    double zero_frac = uniform01(s, 901) < 0.4 ? uniform01(s, 902) * 0.7 : 0.0;
    NonnegMatrix m = oracles::random_matrix(s, n, zero_frac, 0.0, 1.0);
    SpectralBracket b = spectral_radius(m, 1e-10);
    double rho = oracles::perron_root(m);
    double slack = 1e-6 * (1.0 + rho);
    CHECK(b.lower <= rho + slack);
    CHECK(b.upper >= rho - slack);
    ++checked;
  }
  CHECK(checked == 300);
}

TEST_CASE("norm ordering and entrywise monotonicity") {
  for (std::uint64_t s = 0; s < 60; ++s) {
    std::size_t n = 1 + static_cast<std::size_t>(uniform01(s, 903) * 5.0);
    if (n > 6) n = 6;
    NonnegMatrix x = oracles::random_matrix(s, n, 0.3, 0.0, 2.0);
    double op = matrix_norm(x, MatrixNorm::Operator2);
    double fr = matrix_norm(x, MatrixNorm::Frobenius);
    CHECK(op <= fr * (1.0 + 1e-9) + 1e-12);
    CHECK(fr <= std::sqrt(static_cast<double>(n)) * op * (1.0 + 1e-9) + 1e-12);

    // y >= x entrywise
    std::vector<double> ye = x.entries();
    for (std::size_t i = 0; i < ye.size(); ++i)
      ye[i] += uniform01(s, 2000 + static_cast<std::int64_t>(i));
    NonnegMatrix y(n, std::move(ye));
    CHECK(matrix_norm(x) <= matrix_norm(y) + 1e-12);
    CHECK(matrix_norm(x, MatrixNorm::Operator2) <=
          matrix_norm(y, MatrixNorm::Operator2) + 1e-9);
    SpectralBracket bx = spectral_radius(x, 1e-9);
    SpectralBracket by = spectral_radius(y, 1e-9);
    CHECK(bx.upper <= by.upper + 2e-9);
  }
}

TEST_CASE("column_stats and kappa") {
  auto ones = NonnegMatrix::ones(2);
  ColumnStats s = column_stats(ones, DiagonalVector({1.0, 4.0}));
  CHECK(s.col_min[0] == 1.0);
  CHECK(s.col_min[1] == 4.0);
  CHECK(s.col_max[0] == 1.0);
  CHECK(s.col_max[1] == 4.0);
  CHECK(s.kappa == 1.0);
  CHECK(s.global_max == 4.0);

  auto a = NonnegMatrix::from_rows({{1.0, 2.0}, {3.0, 4.0}});
  ColumnStats t = column_stats(a, DiagonalVector({1.0, 1.0}));
  CHECK(t.col_min[0] == 1.0);
  CHECK(t.col_min[1] == 2.0);
  CHECK(t.col_max[0] == 3.0);
  CHECK(t.col_max[1] == 4.0);
  CHECK(t.kappa == 3.0);

  auto zc = NonnegMatrix::from_rows({{0.0, 1.0}, {0.0, 1.0}});
  ColumnStats u = column_stats(zc, DiagonalVector({1.0, 1.0}));
  CHECK_FALSE(u.kappa_finite);
  CHECK(std::isinf(u.kappa));
}

TEST_CASE("check_subinvariance on the pinned examples") {
  auto tri = NonnegMatrix::from_rows({{1.0, 1.0}, {0.0, 1.0}});
  auto r1 = check_subinvariance(tri, {1.0, 1.0}, 2.0, 1e-12);
  CHECK(r1.holds);
  CHECK(spectral_radius(tri, 1e-8).lower <= 2.0 + 2e-12);

  auto r2 = check_subinvariance(NonnegMatrix::ones(2), {1.0, 1.0}, 2.0, 1e-12);
  CHECK(r2.holds);
  CHECK(r2.margin == doctest::Approx(0.0));

  auto anti = NonnegMatrix::from_rows({{0.0, 2.0}, {3.0, 0.0}});
  auto r3 = check_subinvariance(anti, {std::sqrt(2.0), std::sqrt(3.0)}, std::sqrt(6.0), 1e-9);
  CHECK(r3.holds);
  CHECK(std::abs(r3.margin) <= 1e-12);

  CHECK_THROWS_AS(check_subinvariance(tri, {1.0, 0.0}, 2.0, 1e-9), ValidationError);
}

TEST_CASE("subinvariance implies a spectral radius bound") {
  for (std::uint64_t s = 0; s < 80; ++s) {
    std::size_t n = 1 + static_cast<std::size_t>(uniform01(s, 904) * 5.0);
    if (n > 6) n = 6;
    NonnegMatrix c = oracles::random_matrix(s, n, 0.2, 0.0, 3.0);
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i)
      w[i] = 0.25 + uniform01(s, 3000 + static_cast<std::int64_t>(i));
    // choose mu so the inequality holds with margin ~0
    double mu = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double cw = 0.0;
      for (std::size_t j = 0; j < n; ++j) cw += c(i, j) * w[j];
      mu = std::max(mu, cw / w[i]);
    }
    if (mu == 0.0) mu = 1.0;
    double tol = 1e-9;
    auto r = check_subinvariance(c, w, mu, tol);
    CHECK(r.holds);
    SpectralBracket b = spectral_radius(c, 1e-10);
    CHECK(b.lower <= mu + 2.0 * tol);
  }
}

TEST_CASE("classification hierarchy is consistent on random patterns") {
  for (std::uint64_t s = 0; s < 200; ++s) {
    std::size_t n = 1 + static_cast<std::size_t>(uniform01(s, 905) * 5.0);
    if (n > 6) n = 6;
    NonnegMatrix m = oracles::random_matrix(s, n, uniform01(s, 906) * 0.8, 0.0, 1.0);
    MatrixClass c = classify(m);
    bool pos = true;
    for (double x : m.entries()) pos = pos && x > 0.0;
    if (pos) CHECK(c == MatrixClass::Positive);
    if (c == MatrixClass::Positive) {
      // positivity must imply an all-positive first power
      CHECK(pos);
    }
  }
}
