#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "vqt/model.hpp"

namespace vqt::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kValidation = 2,
  kNumerical = 3,
  kStatistical = 4,
};

enum class Spacing { linear, log };

struct GridSpec {
  double x_max = 0.0;
  int points = 400;
  Spacing spacing = Spacing::linear;
};

/// Linear grids start at 0; log grids span [x_max 1e-4, x_max]. k is inserted
/// exactly once, keeping the grid sorted.
std::vector<double> make_grid(const GridSpec& spec, double k);

/// Shortest round-trip-safe form with 15 significant digits.
std::string format_number(double v);

/// One sweep axis: a parameter name and the values it takes.
struct SweepSpec {
  std::string param;
  std::vector<double> values;
};

/// "name=start:stop:steps" (inclusive, steps >= 2) or "name=v1,v2,...".
/// Throws Error(InvalidArgument).
SweepSpec parse_sweep(const std::string& text);

/// Sweep metrics: "mean", "p_wait" or "cdf@x".
struct Metric {
  std::string label;
  std::optional<double> cdf_at;
  bool p_wait = false;
};

std::vector<Metric> parse_metrics(const std::string& text);

/// Number of worker threads from VQT_THREADS (0 or unset means hardware concurrency).
unsigned worker_threads();

/// Entry point shared by the executable and the tests.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace vqt::cli
