#pragma once

// Reference computations that share no code path with the library.

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "vqt/model.hpp"
#include "vqt/numerics.hpp"

namespace vqt::testing {

/// exp(a) by scaling and squaring around a 30-term Taylor series.
inline DenseMatrix taylor_expm(const DenseMatrix& a) {
  const std::size_t n = a.rows();
  int squarings = 0;
  double norm = a.norm_inf();
  while (norm > 0.5) {
    norm /= 2.0;
    ++squarings;
  }
  const DenseMatrix scaled = std::ldexp(1.0, -squarings) * a;
  DenseMatrix term = DenseMatrix::identity(n);
  DenseMatrix sum = DenseMatrix::identity(n);
  for (int k = 1; k <= 30; ++k) {
    term = (1.0 / k) * (term * scaled);
    sum += term;
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  return sum;
}

inline double rel_diff(const DenseMatrix& a, const DenseMatrix& b) {
  return max_abs_diff(a, b) / std::max(1.0, b.max_abs());
}

/// Limit k -> 0+ as a truncated CTMC on (class-1 busy, class-2 busy, queue length):
/// arrivals finding a free server are class 1, queued customers start as class 2.
struct ZeroThresholdLimit {
  double p_wait_zero = 0.0;
  double mean_wait = 0.0;
};

inline ZeroThresholdLimit zero_threshold_limit(int c, double lambda, double mu1, double mu2,
                                               int max_queue) {
  std::map<std::tuple<int, int, int>, int> index;
  std::vector<std::tuple<int, int, int>> states;
  for (int q = 0; q <= max_queue; ++q)
    for (int i = 0; i <= c; ++i)
      for (int j = 0; i + j <= c; ++j) {
        if (q > 0 && i + j < c) continue;
        index[{i, j, q}] = static_cast<int>(states.size());
        states.emplace_back(i, j, q);
      }
  const auto n = static_cast<Eigen::Index>(states.size());
  Eigen::MatrixXd gen = Eigen::MatrixXd::Zero(n, n);
  const auto add = [&](Eigen::Index from, std::tuple<int, int, int> to, double rate) {
    const Eigen::Index t = index.at(to);
    gen(from, t) += rate;
    gen(from, from) -= rate;
  };
  for (Eigen::Index s = 0; s < n; ++s) {
    const auto [i, j, q] = states[static_cast<std::size_t>(s)];
    if (i + j < c) add(s, {i + 1, j, 0}, lambda);
    else if (q < max_queue) add(s, {i, j, q + 1}, lambda);
    if (i > 0) add(s, q > 0 ? std::tuple{i - 1, j + 1, q - 1} : std::tuple{i - 1, j, 0}, i * mu1);
    if (j > 0) add(s, q > 0 ? std::tuple{i, j, q - 1} : std::tuple{i, j - 1, 0}, j * mu2);
  }
  // pi gen = 0 with sum pi = 1: replace one balance equation by the normalization.
  Eigen::MatrixXd a = gen.transpose();
  a.row(0).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(0) = 1.0;
  const Eigen::VectorXd pi = a.partialPivLu().solve(rhs);
  ZeroThresholdLimit out;
  double queue = 0.0;
  for (Eigen::Index s = 0; s < n; ++s) {
    const auto [i, j, q] = states[static_cast<std::size_t>(s)];
    if (i + j < c) out.p_wait_zero += pi(s);
    queue += q * pi(s);
  }
  out.mean_wait = queue / lambda;
  return out;
}

/// Random stable, non-degenerate parameter draws with a comfortable margin. By default
/// draws whose generator growth exceeds kGrowthLimit are skipped.
class ParamSampler {
 public:
  explicit ParamSampler(unsigned seed, int max_c = 8, bool bounded_growth = true)
      : rng_(seed), max_c_(max_c), bounded_growth_(bounded_growth) {}

  QueueParams next() {
    std::uniform_int_distribution<int> servers(1, max_c_);
    std::uniform_real_distribution<double> rate(0.2, 3.0);
    std::uniform_real_distribution<double> load(0.15, 0.9);
    std::uniform_real_distribution<double> threshold(0.1, 4.0);
    for (;;) {
      const int c = servers(rng_);
      const double mu1 = rate(rng_);
      const double mu2 = rate(rng_);
      const double lambda = load(rng_) * c * mu2;
      const double k = threshold(rng_);
      const double scale = std::max({lambda, c * mu1, c * mu2});
      const double margin = 1e-3 * scale;
      if (std::abs(lambda - c * mu1) < margin || std::abs(lambda - c * (mu1 - mu2)) < margin ||
          std::abs(lambda - c * (mu2 - mu1)) < margin || std::abs(mu1 - mu2) < margin) {
        continue;
      }
      const QueueParams p = validate_params(c, lambda, mu1, mu2, k);
      if (bounded_growth_ && generator_growth(p, build_matrices(p)) > kGrowthLimit) continue;
      return p;
    }
  }

 private:
  std::mt19937_64 rng_;
  int max_c_;
  bool bounded_growth_;
};

}  // namespace vqt::testing
