#pragma once

#include "vqt/model.hpp"

namespace vqt {

/// Closed form for one server. The waiting-time density is
///   lambda pi00 e^{-(mu1 - lambda) x}                                     on (0, k),
///   lambda pi00 e^{-(mu1 - lambda) k} [(mu2 - mu1) e^{-mu1 y} - lambda e^{-(mu2 - lambda) y}]
///     / (mu2 - mu1 - lambda)                                              on (k, inf), y = x - k.
struct SingleServerSolution {
  QueueParams params;
  double pi00 = 0.0;
  /// lambda pi00 e^{-(mu1 - lambda) k}.
  double density_at_k = 0.0;

  double density(double x) const;
  /// P(W <= x), including the atom pi00.
  double cdf(double x) const;
  double mean() const;
};

/// Requires c = 1 and stability. Throws Error(PoleParameter) when
/// mu2 - mu1 - lambda vanishes to the degeneracy tolerance.
SingleServerSolution single_server(const QueueParams& params);

/// Standard M/M/c waiting-time law with service rate mu.
struct ErlangCSolution {
  int c = 1;
  double lambda = 0.0;
  double mu = 0.0;
  /// lambda / (c mu).
  double rho = 0.0;
  /// Probability of waiting.
  double c_prob = 0.0;
  /// c mu (1 - rho).
  double decay = 0.0;

  double tail(double x) const;
  double cdf(double x) const { return 1.0 - tail(x); }
  double density(double x) const;
  double mean() const { return c_prob / (c * mu - lambda); }
};

/// Throws Error(NonPositive) or Error(Unstable).
ErlangCSolution erlang_c(int c, double lambda, double mu);
/// Uses mu2 as the common rate.
ErlangCSolution erlang_c(const QueueParams& params);

}  // namespace vqt
