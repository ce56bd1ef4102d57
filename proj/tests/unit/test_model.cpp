#include <doctest.h>

#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "vqt/error.hpp"
#include "vqt/model.hpp"

using namespace vqt;
using vqt::testing::ParamSampler;
using vqt::testing::rel_diff;
using vqt::testing::taylor_expm;

namespace {

ErrorKind kind_of(int c, double lambda, double mu1, double mu2, double k) {
  try {
    (void)validate_params(c, lambda, mu1, mu2, k);
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::InvalidArgument;
}

QueueParams golden() { return validate_params(2, 2.0, 0.75, 1.12, 0.45); }

}  // namespace

TEST_CASE("validate_params: golden c=2 set is valid") {
  const QueueParams p = golden();
  CHECK(p.kind == ModelKind::general);
  CHECK(p.load() == doctest::Approx(2.0 / 2.24));
}

TEST_CASE("validate_params: unstable single server") {
  CHECK(kind_of(1, 2.0, 1.0, 1.5, 1.0) == ErrorKind::Unstable);
  CHECK(kind_of(2, 2.24, 0.75, 1.12, 0.45) == ErrorKind::Unstable);
}

TEST_CASE("validate_params: lambda = c mu1 is degenerate with a suggested perturbation") {
  try {
    (void)validate_params(3, 2.4, 0.8, 0.9, 5.0);
    FAIL("expected DegenerateError");
  } catch (const DegenerateError& e) {
    CHECK(e.kind() == ErrorKind::Degenerate);
    CHECK(e.condition() == DegeneracyCondition::lambda_equals_c_mu1);
    CHECK(e.suggestion().mu1 == doctest::Approx(0.8 * (1.0 + 1e-7)).epsilon(1e-15));
    CHECK(e.suggestion().mu2 == 0.9);
    CHECK_NOTHROW((void)validate_params(3, 2.4, e.suggestion().mu1, 0.9, 5.0));
  }
}

TEST_CASE("validate_params: every degeneracy line is detected") {
  CHECK(kind_of(2, 2.0 * (0.9 - 0.5), 0.9, 0.5, 1.0) == ErrorKind::Degenerate);
  CHECK(kind_of(2, 2.0 * (1.5 - 0.8), 1.5, 0.8, 1.0) == ErrorKind::Degenerate);
  CHECK(kind_of(3, 3.0 * (2.0 - 1.0), 2.0, 1.0, 1.0) == ErrorKind::Unstable);
  CHECK(kind_of(2, 2.0 * (1.5 - 0.5), 0.5, 1.5, 1.0) == ErrorKind::Degenerate);
  CHECK(kind_of(4, 4.0 * (3.0 - 2.5), 3.0, 2.5, 1.0) == ErrorKind::Degenerate);
  CHECK(kind_of(2, 1.0, 1.0, 1.0 + 1e-12, 1.0) == ErrorKind::Degenerate);
  try {
    (void)validate_params(2, 1.0, 1.0, 1.0 + 1e-12, 1.0);
  } catch (const DegenerateError& e) {
    CHECK(e.condition() == DegeneracyCondition::mu1_near_mu2);
    CHECK_NOTHROW((void)validate_params(2, 1.0, e.suggestion().mu1, e.suggestion().mu2, 1.0));
  }
}

TEST_CASE("validate_params: non-positive and non-finite inputs") {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  CHECK(kind_of(0, 1.0, 1.0, 2.0, 1.0) == ErrorKind::NonPositive);
  CHECK(kind_of(1, -1.0, 1.0, 2.0, 1.0) == ErrorKind::NonPositive);
  CHECK(kind_of(1, 1.0, 0.0, 2.0, 1.0) == ErrorKind::NonPositive);
  CHECK(kind_of(1, 1.0, 1.0, nan, 1.0) == ErrorKind::NonPositive);
  CHECK(kind_of(1, 1.0, 1.0, 2.0, 0.0) == ErrorKind::NonPositive);
  CHECK(kind_of(1, 1.0, 1.0, 2.0, std::numeric_limits<double>::infinity()) == ErrorKind::NonPositive);
}

TEST_CASE("validate_params: equal rates route to the Erlang-C model") {
  const QueueParams p = validate_params(1, 2.0, 1.5, 3.0, 1.0);
  CHECK(p.kind == ModelKind::general);
  CHECK(validate_params(3, 2.0, 0.8, 0.8, 5.0).kind == ModelKind::erlang_c);
}

TEST_CASE("unchecked_params accepts unstable and degenerate sets") {
  CHECK_NOTHROW((void)unchecked_params(3, 2.4, 0.8, 0.9, 5.0));
  CHECK_NOTHROW((void)unchecked_params(1, 5.0, 1.0, 1.0, 1.0));
  CHECK_THROWS_AS((void)unchecked_params(1, 0.0, 1.0, 1.0, 1.0), Error);
}

TEST_CASE("build_matrices: golden c=2 blocks") {
  const ModelMatrices m = build_matrices(golden());
  CHECK(max_abs_diff(m.b1, DenseMatrix{{0.75, 1.12}, {0.0, 1.50}}) < 1e-15);
  CHECK(max_abs_diff(m.b2, DenseMatrix{{2.24, 0.0}, {0.75, 1.12}}) < 1e-15);
  CHECK(max_abs_diff(m.delta_top(), DenseMatrix{{1.12, 0.0}, {0.0, 0.75}}) < 1e-15);
  CHECK(max_abs_diff(m.delta[0], DenseMatrix{{0.0}}) == 0.0);
}

TEST_CASE("build_matrices: golden D~ entries against hand-derived conjugation") {
  const double mu1 = 0.75;
  const double mu2 = 1.12;
  const ModelMatrices m = build_matrices(golden());
  // B1^-1 Delta_1 B1 worked out symbolically for c = 2.
  const DenseMatrix d1{{mu1 + mu2, mu2 * (mu2 - mu1) / mu1}, {0.0, 2.0 * mu1}};
  const DenseMatrix d2{{2.0 * mu2, 0.0}, {mu1 * (mu1 - mu2) / mu2, mu2 + mu1}};
  CHECK(max_abs_diff(m.d_tilde_1, d1) < 1e-14);
  CHECK(max_abs_diff(m.d_tilde_2, d2) < 1e-14);
  CHECK(m.d_tilde_1(0, 1) == doctest::Approx(0.552533).epsilon(1e-6));
  CHECK(max_abs_diff(m.d_tilde_1 * m.d_tilde_1_inv, DenseMatrix::identity(2)) < 1e-14);
  CHECK(max_abs_diff(m.d_tilde_2 * m.d_tilde_2_inv, DenseMatrix::identity(2)) < 1e-14);
}

TEST_CASE("build_matrices: rectangular boundary blocks have the documented shapes") {
  const ModelMatrices m = build_matrices(validate_params(4, 2.0, 0.8, 0.7, 5.0));
  REQUIRE(m.b_hat.size() == 4);
  REQUIRE(m.i_hat.size() == 4);
  for (std::size_t n = 0; n < 4; ++n) {
    CHECK(m.b_hat[n].rows() == n + 2);
    CHECK(m.b_hat[n].cols() == n + 1);
    CHECK(m.i_hat[n].rows() == n);
    CHECK(m.i_hat[n].cols() == n + 1);
  }
  CHECK(max_abs_diff(m.i_hat[2], DenseMatrix{{0, 1, 0}, {0, 0, 1}}) == 0.0);
}

TEST_CASE("build_matrices: row sums and D~ spectra over random draws") {
  ParamSampler sampler(101);
  for (int draw = 0; draw < 60; ++draw) {
    const QueueParams p = sampler.next();
    const ModelMatrices m = build_matrices(p);
    const int c = p.c;
    for (int i = 0; i < c; ++i) {
      double s1 = 0.0;
      double s2 = 0.0;
      for (int j = 0; j < c; ++j) {
        s1 += m.b1(i, j);
        s2 += m.b2(i, j);
      }
      CHECK(s1 == doctest::Approx((i + 1) * p.mu1 + (c - i - 1) * p.mu2));
      CHECK(s2 == doctest::Approx(i * p.mu1 + (c - i) * p.mu2));
    }
    CHECK(is_triangular(m.d_tilde_1, Triangle::upper));
    CHECK(is_triangular(m.d_tilde_2, Triangle::lower));
    for (int j = 0; j < c; ++j) {
      const double base = j * p.mu1 + (c - 1 - j) * p.mu2;
      CHECK(m.d_tilde_1(j, j) == doctest::Approx(base + p.mu1));
      CHECK(m.d_tilde_2(j, j) == doctest::Approx(base + p.mu2));
    }
    CHECK(rel_diff(m.d_tilde_1_eigen.reconstruct(), m.d_tilde_1) < 1e-10);
    CHECK(rel_diff(m.d_tilde_2_eigen.reconstruct(), m.d_tilde_2) < 1e-10);
  }
}

TEST_CASE("tilde_q: identity at zero and scalar for one server") {
  const ModelMatrices m = build_matrices(golden());
  CHECK(max_abs_diff(tilde_q(1, 0.0, m), DenseMatrix::identity(2)) < 1e-15);
  CHECK(max_abs_diff(tilde_q(2, 0.0, m), DenseMatrix::identity(2)) < 1e-15);

  const ModelMatrices m1 = build_matrices(validate_params(1, 1.0, 2.0, 4.0, 1.0));
  CHECK(tilde_q(1, 0.7, m1)(0, 0) == doctest::Approx(std::exp(-2.0 * 0.7)));
  CHECK(tilde_q(2, 0.7, m1)(0, 0) == doctest::Approx(std::exp(-4.0 * 0.7)));
}

TEST_CASE("tilde_q: forward difference matches -Q~ D~") {
  const ModelMatrices m = build_matrices(validate_params(3, 2.0, 0.8, 0.7, 5.0));
  const double h = 1e-6;
  for (int kappa : {1, 2}) {
    const DenseMatrix& d = kappa == 1 ? m.d_tilde_1 : m.d_tilde_2;
    for (double x : {0.1, 1.0, 4.0}) {
      const DenseMatrix fd = (1.0 / h) * (tilde_q(kappa, x + h, m) - tilde_q(kappa, x, m));
      const DenseMatrix exact = -(tilde_q(kappa, x, m) * d);
      CHECK(max_abs_diff(fd, exact) <= 1e-4 * exact.max_abs());
      CHECK(rel_diff(tilde_q(kappa, x, m), taylor_expm(-x * d)) < 1e-10);
    }
  }
}

TEST_CASE("class_exchange_matrix: identity M (B1 - mu1 I - Delta) = B2 - mu2 I - Delta") {
  ParamSampler sampler(202);
  for (int draw = 0; draw < 100; ++draw) {
    const QueueParams p = sampler.next();
    const ModelMatrices m = build_matrices(p);
    const auto n = static_cast<std::size_t>(p.c);
    const DenseMatrix lhs =
        class_exchange_matrix(p) * (m.b1 - p.mu1 * DenseMatrix::identity(n) - m.delta_top());
    const DenseMatrix rhs = m.b2 - p.mu2 * DenseMatrix::identity(n) - m.delta_top();
    CHECK(max_abs_diff(lhs, rhs) <= 1e-12 * std::max(1.0, rhs.max_abs()));
  }
}

TEST_CASE("class_exchange_matrix: subdiagonal carries a negative sign") {
  const QueueParams p = validate_params(3, 2.0, 0.8, 0.7, 5.0);
  const DenseMatrix mm = class_exchange_matrix(p);
  CHECK(mm(0, 2) == doctest::Approx(3 * 0.7));
  CHECK(mm(1, 0) == doctest::Approx(-(1.0 / 2.0) * (0.8 / 0.7)));
  CHECK(mm(1, 2) == doctest::Approx(0.8));
  CHECK(mm(2, 1) == doctest::Approx(-(2.0 / 1.0) * (0.8 / 0.7)));
}
