#include <doctest.h>

#include <map>

#include "oracles.hpp"
#include "properties.hpp"

using namespace vqt;
using vqt::testing::ParamSampler;

TEST_CASE("every invariant holds on 250 random draws with c in [1, 8] and bounded growth") {
  ParamSampler sampler(4242);
  std::map<std::string, double> worst;
  for (int draw = 0; draw < 250; ++draw) {
    const QueueParams p = sampler.next();
    CAPTURE(draw);
    CAPTURE(p.c);
    CAPTURE(p.lambda);
    CAPTURE(p.mu1);
    CAPTURE(p.mu2);
    CAPTURE(p.k);
    for (const auto& check : vqt::testing::check_properties(p)) {
      CAPTURE(check.name);
      CAPTURE(check.value);
      CHECK(check.ok());
      worst[check.name] = std::max(worst[check.name], check.value);
    }
  }
  for (const auto& [name, value] : worst) MESSAGE(name << ": " << value);
}

TEST_CASE("the sampler covers every server count") {
  ParamSampler sampler(4242);
  std::map<int, int> counts;
  for (int draw = 0; draw < 250; ++draw) ++counts[sampler.next().c];
  for (int c = 1; c <= 8; ++c) CHECK(counts[c] >= 10);
}

TEST_CASE("draws beyond the growth limit are flagged and stay close") {
  ParamSampler sampler(4242, 8, false);
  int flagged = 0;
  for (int draw = 0; draw < 400; ++draw) {
    const QueueParams p = sampler.next();
    if (generator_growth(p, build_matrices(p)) <= kGrowthLimit) continue;
    ++flagged;
    CAPTURE(draw);
    const StationarySolution s = solve(p);
    bool warned = false;
    for (const auto& w : s.warnings) warned = warned || w.find("generator entries") != std::string::npos;
    CHECK(warned);
    for (const auto& check : vqt::testing::check_properties(p)) {
      CAPTURE(check.name);
      CHECK(check.value <= 1e-6);
    }
  }
  CHECK(flagged > 0);
  MESSAGE("flagged draws: " << flagged);
}
