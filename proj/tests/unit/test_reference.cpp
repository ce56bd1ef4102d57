#include <doctest.h>

#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "vqt/error.hpp"
#include "vqt/reference.hpp"

using namespace vqt;

TEST_CASE("single_server: equal rates give the M/M/1 empty probability") {
  const SingleServerSolution s = single_server(unchecked_params(1, 1.0, 2.0, 2.0, 0.7));
  CHECK(s.pi00 == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(s.mean() == doctest::Approx(0.5).epsilon(1e-12));
  for (double x : {0.1, 0.7, 2.0, 6.0})
    CHECK(s.cdf(x) == doctest::Approx(1.0 - 0.5 * std::exp(-x)).epsilon(1e-12));
}

TEST_CASE("single_server: density is continuous at k") {
  for (auto [lambda, mu1, mu2, k] : std::vector<std::tuple<double, double, double, double>>{
           {1.0, 2.0, 4.0, 1.0}, {0.5, 3.0, 0.9, 0.3}, {1.0, 0.7, 1.6, 2.0}}) {
    const SingleServerSolution s = single_server(validate_params(1, lambda, mu1, mu2, k));
    const double left = lambda * s.pi00 * std::exp(-(mu1 - lambda) * k);
    CHECK(s.density_at_k == doctest::Approx(left).epsilon(1e-14));
    CHECK(s.density(k) == doctest::Approx(left).epsilon(1e-12));
    CHECK(s.density(k * (1 + 1e-12)) == doctest::Approx(left).epsilon(1e-9));
  }
}

TEST_CASE("single_server: atom plus density has unit mass") {
  using Q = boost::math::quadrature::gauss_kronrod<double, 31>;
  for (auto [lambda, mu1, mu2, k] : std::vector<std::tuple<double, double, double, double>>{
           {1.0, 2.0, 4.0, 1.0}, {0.5, 3.0, 0.9, 0.3}, {1.0, 0.7, 1.6, 2.0}}) {
    const SingleServerSolution s = single_server(validate_params(1, lambda, mu1, mu2, k));
    CHECK(std::abs(s.cdf(1e4) - 1.0) < 1e-12);
    CHECK(s.cdf(0.0) == doctest::Approx(s.pi00).epsilon(1e-15));
    const auto f = [&](double x) { return s.density(x); };
    const double mass = Q::integrate(f, 0.0, k, 15, 1e-14) + Q::integrate(f, k, k + 200.0, 20, 1e-14);
    CHECK(std::abs(s.pi00 + mass - 1.0) < 1e-10);
    const auto g = [&](double x) { return x * s.density(x); };
    const double mean = Q::integrate(g, 0.0, k, 15, 1e-14) + Q::integrate(g, k, k + 200.0, 20, 1e-14);
    CHECK(s.mean() == doctest::Approx(mean).epsilon(1e-9));
  }
}

TEST_CASE("single_server: pole of the upper branch is rejected") {
  // For one server the pole coincides with a degeneracy line, so validation is bypassed.
  try {
    (void)single_server(unchecked_params(1, 1.0, 1.5, 2.5, 1.0));
    FAIL("expected PoleParameter");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::PoleParameter);
  }
  CHECK_THROWS_AS((void)single_server(validate_params(2, 1.0, 1.0, 2.0, 1.0)), Error);
}

TEST_CASE("erlang_c: one server is M/M/1") {
  const ErlangCSolution e = erlang_c(1, 1.0, 2.0);
  CHECK(e.c_prob == doctest::Approx(0.5));
  CHECK(e.rho == doctest::Approx(0.5));
  for (double x : {0.0, 0.5, 3.0}) CHECK(e.tail(x) == doctest::Approx(0.5 * std::exp(-x)));
}

TEST_CASE("erlang_c: two servers at unit rates") {
  const ErlangCSolution e = erlang_c(2, 1.0, 1.0);
  CHECK(e.c_prob == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(e.mean() == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  for (double x : {0.0, 0.5, 3.0}) {
    CHECK(e.tail(x) == doctest::Approx(std::exp(-x) / 3.0).epsilon(1e-14));
    CHECK(e.density(x) == doctest::Approx(std::exp(-x) / 3.0).epsilon(1e-14));
  }
}

TEST_CASE("erlang_c: tail is log-linear with slope -c mu (1 - rho)") {
  for (auto [c, lambda, mu] : std::vector<std::tuple<int, double, double>>{
           {3, 2.0, 0.8}, {5, 4.1, 1.0}, {8, 1.0, 0.3}}) {
    const ErlangCSolution e = erlang_c(c, lambda, mu);
    CHECK(e.c_prob > 0.0);
    CHECK(e.c_prob < 1.0);
    const double slope = (std::log(e.tail(4.0)) - std::log(e.tail(1.0))) / 3.0;
    CHECK(slope == doctest::Approx(-(c * mu - lambda)).epsilon(1e-12));
    CHECK(e.decay == doctest::Approx(c * mu - lambda).epsilon(1e-14));
  }
}

TEST_CASE("erlang_c: stability and positivity are enforced") {
  CHECK_THROWS_AS((void)erlang_c(2, 2.0, 1.0), Error);
  CHECK_THROWS_AS((void)erlang_c(0, 1.0, 1.0), Error);
  CHECK_THROWS_AS((void)erlang_c(2, 1.0, -1.0), Error);
  const ErlangCSolution via_params = erlang_c(validate_params(3, 2.0, 0.8, 0.8, 5.0));
  CHECK(via_params.c_prob == doctest::Approx(erlang_c(3, 2.0, 0.8).c_prob));
}
