#include "vqt/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <numeric>
#include <queue>
#include <random>
#include <thread>

namespace vqt {

namespace {

constexpr double kZ95 = 1.96;

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double exponential(std::mt19937_64& rng, double rate) {
  return -std::log1p(-uniform01(rng)) / rate;
}

Estimate summarize(const std::vector<double>& means) {
  Estimate e;
  const auto n = static_cast<double>(means.size());
  if (means.empty()) return e;
  e.value = std::accumulate(means.begin(), means.end(), 0.0) / n;
  if (means.size() < 2) return e;
  double ss = 0.0;
  for (double m : means) ss += (m - e.value) * (m - e.value);
  e.half_width = kZ95 * std::sqrt(ss / (n - 1.0) / n);
  return e;
}

void fill_estimates(SimEstimate& est) {
  const BatchSeries& b = est.batches;
  est.p_wait_zero = summarize(b.p_wait_zero);
  est.cdf_points.clear();
  for (const auto& series : b.cdf_points) est.cdf_points.push_back(summarize(series));
  est.mean_wait = summarize(b.mean_wait);
  est.class2_fraction = summarize(b.class2_fraction);
  est.mean_queue_length = summarize(b.queue_length);
}

}  // namespace

SimEstimate simulate(const QueueParams& params, const SimConfig& config) {
  if (config.batches < 2) throw Error(ErrorKind::InvalidArgument, "need at least 2 batches");
  if (!(config.warmup_fraction >= 0.0 && config.warmup_fraction < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "warmup_fraction must lie in [0, 1)");
  }
  if (!std::is_sorted(config.grid.begin(), config.grid.end())) {
    throw Error(ErrorKind::InvalidArgument, "simulation grid must be ascending");
  }
  const auto warmup =
      static_cast<std::uint64_t>(config.warmup_fraction * static_cast<double>(config.num_arrivals));
  const std::uint64_t measured = config.num_arrivals - warmup;
  const auto batches = static_cast<std::uint64_t>(config.batches);
  if (measured < batches) throw Error(ErrorKind::InvalidArgument, "too few arrivals for batching");

  SimEstimate est;
  est.grid = config.grid;
  est.seed_used = config.seed;
  if (!(params.load() < 1.0)) {
    est.warnings.push_back("Unstable: lambda >= c*mu2, estimates are not stationary");
  }

  std::mt19937_64 rng(config.seed);
  std::priority_queue<double, std::vector<double>, std::greater<>> free_at;
  for (int s = 0; s < params.c; ++s) free_at.push(0.0);
  std::deque<double> waiting_starts;

  const std::size_t g = config.grid.size();
  std::vector<double> sum_zero(batches, 0.0), sum_wait(batches, 0.0), sum_class2(batches, 0.0),
      sum_queue(batches, 0.0), count(batches, 0.0);
  std::vector<std::vector<double>> sum_cdf(g, std::vector<double>(batches, 0.0));

  double t = 0.0;
  for (std::uint64_t n = 0; n < config.num_arrivals; ++n) {
    t += exponential(rng, params.lambda);
    const double earliest = free_at.top();
    free_at.pop();
    const double wait = std::max(0.0, earliest - t);
    const bool class2 = wait > params.k;
    const double start = t + wait;
    free_at.push(start + exponential(rng, class2 ? params.mu2 : params.mu1));

    while (!waiting_starts.empty() && waiting_starts.front() <= t) waiting_starts.pop_front();
    const auto queue_seen = static_cast<double>(waiting_starts.size());
    if (wait > 0.0) waiting_starts.push_back(start);

    if (n < warmup) continue;
    const std::uint64_t b = std::min((n - warmup) * batches / measured, batches - 1);
    count[b] += 1.0;
    sum_zero[b] += wait == 0.0 ? 1.0 : 0.0;
    sum_wait[b] += wait;
    sum_class2[b] += class2 ? 1.0 : 0.0;
    sum_queue[b] += queue_seen;
    for (std::size_t i = 0; i < g; ++i) {
      if (wait > config.grid[i]) continue;
      for (std::size_t j = i; j < g; ++j) sum_cdf[j][b] += 1.0;
      break;
    }
  }

  BatchSeries& out = est.batches;
  out.cdf_points.assign(g, {});
  for (std::uint64_t b = 0; b < batches; ++b) {
    out.p_wait_zero.push_back(sum_zero[b] / count[b]);
    out.mean_wait.push_back(sum_wait[b] / count[b]);
    out.class2_fraction.push_back(sum_class2[b] / count[b]);
    out.queue_length.push_back(sum_queue[b] / count[b]);
    for (std::size_t i = 0; i < g; ++i) out.cdf_points[i].push_back(sum_cdf[i][b] / count[b]);
  }
  fill_estimates(est);
  return est;
}

std::uint64_t derive_seed(std::uint64_t base, int replication) {
  std::uint64_t z = base + static_cast<std::uint64_t>(replication + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

SimEstimate pool(const std::vector<SimEstimate>& runs) {
  if (runs.empty()) throw Error(ErrorKind::InvalidArgument, "nothing to pool");
  SimEstimate est;
  est.grid = runs.front().grid;
  est.seed_used = runs.front().seed_used;
  est.replications = static_cast<int>(runs.size());
  BatchSeries& b = est.batches;
  b.cdf_points.assign(est.grid.size(), {});
  const auto append = [](std::vector<double>& dst, const std::vector<double>& src) {
    dst.insert(dst.end(), src.begin(), src.end());
  };
  for (const auto& r : runs) {
    append(b.p_wait_zero, r.batches.p_wait_zero);
    append(b.mean_wait, r.batches.mean_wait);
    append(b.class2_fraction, r.batches.class2_fraction);
    append(b.queue_length, r.batches.queue_length);
    for (std::size_t i = 0; i < est.grid.size(); ++i)
      append(b.cdf_points[i], r.batches.cdf_points[i]);
    for (const auto& w : r.warnings)
      if (std::find(est.warnings.begin(), est.warnings.end(), w) == est.warnings.end())
        est.warnings.push_back(w);
  }
  fill_estimates(est);
  return est;
}

SimEstimate simulate_replicated(const QueueParams& params, const SimConfig& config) {
  if (config.replications < 1) throw Error(ErrorKind::InvalidArgument, "replications must be >= 1");
  const auto reps = static_cast<std::size_t>(config.replications);
  std::vector<SimEstimate> runs(reps);
  unsigned workers = config.threads > 0 ? static_cast<unsigned>(config.threads)
                                        : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(reps));

  std::vector<std::exception_ptr> failures(reps);
  const auto run_one = [&](std::size_t r) {
    try {
      SimConfig one = config;
      one.seed = derive_seed(config.seed, static_cast<int>(r));
      runs[r] = simulate(params, one);
    } catch (...) {
      failures[r] = std::current_exception();
    }
  };
  std::vector<std::thread> pool_threads;
  for (unsigned w = 0; w < workers; ++w) {
    pool_threads.emplace_back([&, w] {
      for (std::size_t r = w; r < reps; r += workers) run_one(r);
    });
  }
  for (auto& th : pool_threads) th.join();
  for (const auto& f : failures)
    if (f) std::rethrow_exception(f);

  SimEstimate est = pool(runs);
  est.seed_used = config.seed;
  return est;
}

}  // namespace vqt
