#include <doctest.h>

#include <cmath>

#include "vqt/reference.hpp"
#include "vqt/simulator.hpp"
#include "vqt/solver.hpp"

using namespace vqt;

namespace {

SimConfig config(std::uint64_t arrivals, std::uint64_t seed, std::vector<double> grid = {}) {
  SimConfig cfg;
  cfg.num_arrivals = arrivals;
  cfg.seed = seed;
  cfg.grid = std::move(grid);
  cfg.threads = 1;
  return cfg;
}

double z(double estimate, double truth, const Estimate& e) {
  return (estimate - truth) / e.standard_error();
}

}  // namespace

TEST_CASE("simulate: identical inputs give identical output") {
  const QueueParams p = validate_params(2, 2.0, 0.75, 1.12, 0.45);
  const SimConfig cfg = config(50'000, 17, {0.2, 0.45, 1.0});
  const SimEstimate a = simulate(p, cfg);
  const SimEstimate b = simulate(p, cfg);
  CHECK(a.mean_wait.value == b.mean_wait.value);
  CHECK(a.mean_wait.half_width == b.mean_wait.half_width);
  CHECK(a.p_wait_zero.value == b.p_wait_zero.value);
  CHECK(a.batches.mean_wait == b.batches.mean_wait);
  for (std::size_t i = 0; i < 3; ++i) CHECK(a.cdf_points[i].value == b.cdf_points[i].value);
  CHECK(simulate(p, config(50'000, 18)).mean_wait.value != a.mean_wait.value);
}

TEST_CASE("simulate: probabilities and half-widths are well formed") {
  const SimEstimate e =
      simulate(validate_params(3, 2.0, 0.8, 0.7, 5.0), config(100'000, 5, {1.0, 3.0, 5.0, 7.0, 10.0}));
  CHECK(e.p_wait_zero.value >= 0.0);
  CHECK(e.p_wait_zero.value <= 1.0);
  CHECK(e.p_wait_zero.half_width > 0.0);
  for (const Estimate& c : e.cdf_points) {
    CHECK(c.value >= 0.0);
    CHECK(c.value <= 1.0);
    CHECK(c.half_width > 0.0);
  }
  CHECK(e.batches.mean_wait.size() == 32);
}

TEST_CASE("derive_seed: distinct streams per replication") {
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
  CHECK(derive_seed(7, 3) == derive_seed(7, 3));
}

TEST_CASE("simulate_replicated: equals pooling the individual runs") {
  const QueueParams p = validate_params(2, 2.0, 0.75, 1.12, 0.45);
  SimConfig cfg = config(40'000, 99, {0.45});
  cfg.replications = 4;
  const SimEstimate joint = simulate_replicated(p, cfg);
  std::vector<SimEstimate> runs;
  for (int r = 0; r < 4; ++r) {
    SimConfig one = cfg;
    one.replications = 1;
    one.seed = derive_seed(cfg.seed, r);
    runs.push_back(simulate(p, one));
  }
  const SimEstimate pooled = pool(runs);
  CHECK(joint.mean_wait.value == pooled.mean_wait.value);
  CHECK(joint.mean_wait.half_width == pooled.mean_wait.half_width);
  CHECK(joint.cdf_points[0].value == pooled.cdf_points[0].value);
  CHECK(joint.batches.mean_wait.size() == 128);
  CHECK(joint.replications == 4);
}

TEST_CASE("simulate_replicated: half-width shrinks like one over root R") {
  const QueueParams p = validate_params(3, 2.0, 0.8, 0.9, 5.0);
  SimConfig cfg = config(200'000, 11);
  const double one = simulate_replicated(p, cfg).mean_wait.half_width;
  cfg.replications = 4;
  const double four = simulate_replicated(p, cfg).mean_wait.half_width;
  CHECK(one / four > 1.6);
  CHECK(one / four < 2.4);
}

TEST_CASE("simulate: Little's law and class fractions") {
  const QueueParams p = validate_params(3, 2.0, 0.8, 0.7, 5.0);
  const SimEstimate e = simulate(p, config(400'000, 23, {5.0}));
  const double diff = e.mean_queue_length.value - p.lambda * e.mean_wait.value;
  const double se = std::hypot(e.mean_queue_length.standard_error(), p.lambda * e.mean_wait.standard_error());
  CHECK(std::abs(diff) < 3.0 * se);
  const double class2 = 1.0 - e.cdf_points[0].value;
  CHECK(std::abs(e.class2_fraction.value - class2) < 1e-12);
}

TEST_CASE("simulate: equal rates match the Erlang-C waiting probability") {
  const SimEstimate e = simulate(unchecked_params(3, 2.0, 0.8, 0.8, 5.0), config(1'000'000, 31));
  const double c_prob = erlang_c(3, 2.0, 0.8).c_prob;
  CHECK(std::abs(z(1.0 - e.p_wait_zero.value, c_prob, e.p_wait_zero)) < 3.0);
  CHECK(std::abs(z(e.mean_wait.value, erlang_c(3, 2.0, 0.8).mean(), e.mean_wait)) < 4.0);
}

TEST_CASE("simulate: agrees with the analytic cdf at k = 5, c = 3") {
  const QueueParams p = validate_params(3, 2.0, 0.8, 0.7, 5.0);
  const std::vector<double> grid{1.0, 3.0, 5.0, 7.0, 10.0};
  SimConfig cfg = config(500'000, 41, grid);
  cfg.replications = 2;
  const SimEstimate e = simulate_replicated(p, cfg);
  const StationarySolution sol = solve(p);
  for (std::size_t i = 0; i < grid.size(); ++i)
    CHECK(std::abs(z(e.cdf_points[i].value, eval_cdf(sol, grid[i]).total, e.cdf_points[i])) < 3.0);
}

TEST_CASE("simulate: unstable input is accepted with a warning") {
  const SimEstimate e = simulate(unchecked_params(1, 2.0, 1.0, 1.0, 1.0), config(20'000, 3));
  CHECK_FALSE(e.warnings.empty());
}
