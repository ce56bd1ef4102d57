#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vqt/model.hpp"

namespace vqt {

struct SimConfig {
  std::uint64_t num_arrivals = 1'000'000;
  double warmup_fraction = 0.1;
  std::uint64_t seed = 1;
  /// Points x for P(W <= x), ascending.
  std::vector<double> grid;
  int replications = 1;
  int batches = 32;
  /// Worker threads for replications; 0 picks the hardware concurrency.
  int threads = 0;
};

/// Point estimate with a 95% half-width (1.96 batch-means standard errors).
struct Estimate {
  double value = 0.0;
  double half_width = 0.0;

  double standard_error() const { return half_width / 1.96; }
};

/// Batch means of every statistic, in replication order.
struct BatchSeries {
  std::vector<double> p_wait_zero;
  std::vector<std::vector<double>> cdf_points;
  std::vector<double> mean_wait;
  std::vector<double> class2_fraction;
  std::vector<double> queue_length;
};

struct SimEstimate {
  std::vector<double> grid;
  Estimate p_wait_zero;
  std::vector<Estimate> cdf_points;
  Estimate mean_wait;
  /// Fraction of customers served at mu2.
  Estimate class2_fraction;
  /// Number of customers waiting, as seen by arrivals.
  Estimate mean_queue_length;
  std::uint64_t seed_used = 0;
  int replications = 1;
  BatchSeries batches;
  std::vector<std::string> warnings;
};

/// One FCFS M/M/c run. Each arrival waits W = max(0, earliest free server - t),
/// is class 1 iff W <= k, and draws an exponential service time at that class rate.
/// Accepts degenerate, equal-rate and unstable parameter sets (the last with a warning).
SimEstimate simulate(const QueueParams& params, const SimConfig& config);

/// SplitMix64 finalizer applied to base + (replication + 1) * 0x9E3779B97F4A7C15.
std::uint64_t derive_seed(std::uint64_t base, int replication);

/// Runs config.replications independent runs with derive_seed(config.seed, r)
/// and pools their batch means.
SimEstimate simulate_replicated(const QueueParams& params, const SimConfig& config);

/// Concatenates batch means in the given order and re-estimates.
SimEstimate pool(const std::vector<SimEstimate>& runs);

}  // namespace vqt
