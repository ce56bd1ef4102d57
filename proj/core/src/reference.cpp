#include "vqt/reference.hpp"

#include <algorithm>
#include <cmath>

namespace vqt {

SingleServerSolution single_server(const QueueParams& params) {
  if (params.c != 1) throw Error(ErrorKind::InvalidArgument, "single_server requires c = 1");
  const double lambda = params.lambda;
  const double mu1 = params.mu1;
  const double mu2 = params.mu2;
  if (!(lambda < mu2)) throw Error(ErrorKind::Unstable, "single_server requires lambda < mu2");
  if (std::abs(mu2 - mu1 - lambda) <= kDegeneracyTolerance * params.rate_scale()) {
    throw Error(ErrorKind::PoleParameter, "mu2 - mu1 - lambda vanishes");
  }
  SingleServerSolution s;
  s.params = params;
  const double r1 = mu1 / lambda;
  const double r2 = mu2 / lambda;
  s.pi00 = ((r1 - 1.0) * (r2 - 1.0)) /
           (r1 * (r2 - 1.0) - (mu2 / mu1 - 1.0) * std::exp((lambda - mu1) * params.k));
  s.density_at_k = lambda * s.pi00 * std::exp(-(mu1 - lambda) * params.k);
  return s;
}

double SingleServerSolution::density(double x) const {
  const double lambda = params.lambda;
  const double mu1 = params.mu1;
  const double mu2 = params.mu2;
  if (x <= params.k) return lambda * pi00 * std::exp(-(mu1 - lambda) * x);
  const double y = x - params.k;
  return density_at_k *
         ((mu2 - mu1) * std::exp(-mu1 * y) - lambda * std::exp(-(mu2 - lambda) * y)) /
         (mu2 - mu1 - lambda);
}

double SingleServerSolution::cdf(double x) const {
  const double lambda = params.lambda;
  const double mu1 = params.mu1;
  const double mu2 = params.mu2;
  const double a = mu1 - lambda;
  const double lower_end = std::min(x, params.k);
  double total = pi00 + lambda * pi00 * -std::expm1(-a * lower_end) / a;
  if (x <= params.k) return total;
  const double y = x - params.k;
  total += density_at_k / (mu2 - mu1 - lambda) *
           ((mu2 - mu1) * -std::expm1(-mu1 * y) / mu1 -
            lambda * -std::expm1(-(mu2 - lambda) * y) / (mu2 - lambda));
  return total;
}

double SingleServerSolution::mean() const {
  const double lambda = params.lambda;
  const double mu1 = params.mu1;
  const double mu2 = params.mu2;
  const double k = params.k;
  const double a = mu1 - lambda;
  const double lower = lambda * pi00 * (1.0 - std::exp(-a * k) * (1.0 + a * k)) / (a * a);
  const auto moment = [k](double r) { return 1.0 / (r * r) + k / r; };
  const double upper = density_at_k / (mu2 - mu1 - lambda) *
                       ((mu2 - mu1) * moment(mu1) - lambda * moment(mu2 - lambda));
  return lower + upper;
}

double ErlangCSolution::tail(double x) const { return c_prob * std::exp(-decay * x); }

double ErlangCSolution::density(double x) const { return decay * tail(x); }

ErlangCSolution erlang_c(int c, double lambda, double mu) {
  if (c < 1 || !(lambda > 0.0) || !(mu > 0.0)) {
    throw Error(ErrorKind::NonPositive, "erlang_c requires c >= 1 and positive rates");
  }
  ErlangCSolution s;
  s.c = c;
  s.lambda = lambda;
  s.mu = mu;
  s.rho = lambda / (c * mu);
  if (!(s.rho < 1.0)) throw Error(ErrorKind::Unstable, "erlang_c requires lambda < c mu");
  const double offered = lambda / mu;
  double blocking = 1.0;
  for (int n = 1; n <= c; ++n) blocking = offered * blocking / (n + offered * blocking);
  s.c_prob = blocking / (1.0 - s.rho * (1.0 - blocking));
  s.decay = c * mu * (1.0 - s.rho);
  return s;
}

ErlangCSolution erlang_c(const QueueParams& params) {
  return erlang_c(params.c, params.lambda, params.mu2);
}

}  // namespace vqt
