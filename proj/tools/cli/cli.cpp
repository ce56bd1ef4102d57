#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "vqt/reference.hpp"
#include "vqt/simulator.hpp"
#include "vqt/solver.hpp"

namespace vqt::cli {

namespace {

using Json = nlohmann::ordered_json;

struct ParamFlags {
  std::optional<int> c;
  std::optional<double> lambda;
  std::optional<double> mu1;
  std::optional<double> mu2;
  std::optional<double> k;
};

void add_param_flags(CLI::App* app, ParamFlags& f, bool required) {
  auto mark = [required](CLI::Option* o) { if (required) o->required(); };
  mark(app->add_option("--c", f.c, "Number of servers"));
  mark(app->add_option("--lambda", f.lambda, "Arrival rate"));
  mark(app->add_option("--mu1", f.mu1, "Service rate when the delay is <= k"));
  mark(app->add_option("--mu2", f.mu2, "Service rate when the delay is > k"));
  mark(app->add_option("--k", f.k, "Delay threshold"));
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return out;
}

/// Rounds to the value the 15-digit text form parses back to.
double rounded(double v) { return std::strtod(format_number(v).c_str(), nullptr); }

Json rounded_array(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(rounded(x));
  return a;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const unsigned workers = std::min<unsigned>(worker_threads(), static_cast<unsigned>(n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> failures(workers);
  std::vector<std::thread> threads;
  for (unsigned w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      try {
        for (std::size_t i = next++; i < n; i = next++) body(i);
      } catch (...) {
        failures[w] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (const auto& f : failures)
    if (f) std::rethrow_exception(f);
}

/// Evaluated CDF and density of either the general model or its Erlang-C reduction.
struct Evaluator {
  QueueParams params;
  std::optional<StationarySolution> solution;
  std::optional<ErlangCSolution> erlang;

  explicit Evaluator(const QueueParams& p) : params(p) {
    if (p.kind == ModelKind::erlang_c) {
      erlang = erlang_c(p);
    } else {
      solution = solve(p);
    }
  }

  double cdf(double x) const { return erlang ? erlang->cdf(x) : eval_cdf(*solution, x).total; }
  double pdf(double x) const {
    return erlang ? erlang->density(x) : eval_density(*solution, x).sum();
  }
  double mean() const { return erlang ? erlang->mean() : mean_wait(*solution); }
  double p_wait() const { return erlang ? erlang->c_prob : 1.0 - solution->pi_total(); }
};

QueueParams checked(const ParamFlags& f) {
  return validate_params(*f.c, *f.lambda, *f.mu1, *f.mu2, *f.k);
}

int report_error(const Error& e, std::ostream& err) {
  err << "error: " << e.what() << "\n";
  return is_validation_error(e.kind()) ? kValidation : kNumerical;
}

struct SolveFlags {
  ParamFlags params;
  std::optional<double> grid_max;
  int grid_points = 400;
  std::string spacing = "linear";
  std::string format = "csv";
  std::string out_path;
  bool mean = false;
  bool mixture = false;
  bool verify = false;
};

Json mixture_json(const BranchExpansion& b) {
  Json j;
  j["origin"] = rounded(b.origin);
  j["constant"] = rounded_array(b.constant);
  Json terms = Json::array();
  for (const auto& t : b.terms) {
    terms.push_back({{"rate", rounded(t.rate)}, {"weights", rounded_array(t.weights)}});
  }
  j["terms"] = std::move(terms);
  return j;
}

std::string join(const std::vector<double>& v, char sep) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += sep;
    s += format_number(v[i]);
  }
  return s;
}

void write_mixture_comments(std::ostream& os, const char* name, const BranchExpansion& b) {
  for (const auto& t : b.terms) {
    os << "# mixture branch=" << name << " origin=" << format_number(b.origin)
       << " rate=" << format_number(t.rate) << " weights=" << join(t.weights, ';') << "\n";
  }
  os << "# mixture branch=" << name << " origin=" << format_number(b.origin)
     << " constant=" << join(b.constant, ';') << "\n";
}

int run_solve(const SolveFlags& f, std::ostream& out, std::ostream& err) {
  const QueueParams p = checked(f.params);
  if (f.grid_points < 2) throw Error(ErrorKind::InvalidArgument, "--grid-points must be >= 2");
  GridSpec spec;
  spec.x_max = f.grid_max.value_or(10.0 * p.k);
  spec.points = f.grid_points;
  spec.spacing = f.spacing == "log" ? Spacing::log : Spacing::linear;
  const std::vector<double> grid = make_grid(spec, p.k);

  const Evaluator ev(p);
  const std::size_t c = static_cast<std::size_t>(p.c);
  std::vector<std::vector<double>> comps(grid.size());
  std::vector<double> cdf(grid.size()), pdf(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    cdf[i] = ev.cdf(grid[i]);
    pdf[i] = ev.pdf(grid[i]);
    if (ev.solution) comps[i] = eval_cdf(*ev.solution, grid[i]).components.to_vector();
  });

  std::optional<double> mean;
  if (f.mean) mean = ev.mean();
  std::optional<MixtureExpansion> mix;
  if (f.mixture && ev.solution) mix = scalar_mixture(*ev.solution);
  std::optional<ResidualReport> residuals;
  if (f.verify && ev.solution) residuals = verify_solution(*ev.solution);
  std::vector<std::string> warnings;
  if (ev.solution) warnings = ev.solution->warnings;
  if ((f.mixture || f.verify) && ev.erlang) {
    warnings.push_back("mixture and residual reports apply to the general model only");
  }

  std::ofstream file;
  if (!f.out_path.empty()) {
    file.open(f.out_path);
    if (!file) throw Error(ErrorKind::InvalidArgument, "cannot open " + f.out_path);
  }
  std::ostream& os = f.out_path.empty() ? out : file;

  if (f.format == "json") {
    Json j;
    j["model"] = ev.erlang ? "erlang_c" : "general";
    j["params"] = {{"c", p.c},
                   {"lambda", p.lambda},
                   {"mu1", p.mu1},
                   {"mu2", p.mu2},
                   {"k", p.k}};
    if (ev.solution) {
      Json pi = Json::array();
      for (int i = 0; i < p.c; ++i) {
        std::vector<double> row;
        for (int jj = 0; i + jj < p.c; ++jj) row.push_back(ev.solution->pi_at(i, jj));
        pi.push_back(rounded_array(row));
      }
      j["pi"] = std::move(pi);
      j["b_c"] = rounded(ev.solution->b_c);
    } else {
      j["pi"] = Json::array({Json::array({rounded(1.0 - ev.erlang->c_prob)})});
    }
    j["grid"] = rounded_array(grid);
    j["cdf"] = rounded_array(cdf);
    j["pdf"] = rounded_array(pdf);
    if (ev.solution) {
      Json components = Json::array();
      for (const auto& row : comps) components.push_back(rounded_array(row));
      j["components"] = std::move(components);
    }
    if (mean) j["mean"] = rounded(*mean);
    if (mix) j["mixture"] = {{"lower", mixture_json(mix->lower)}, {"upper", mixture_json(mix->upper)}};
    if (residuals) {
      Json r;
      for (const auto& e : residuals->entries) r[e.name] = rounded(e.value);
      j["residuals"] = std::move(r);
    }
    j["warnings"] = warnings;
    os << j.dump(2) << "\n";
  } else {
    if (ev.erlang) os << "# model=erlang_c\n";
    if (mean) os << "# mean=" << format_number(*mean) << "\n";
    if (mix) {
      write_mixture_comments(os, "lower", mix->lower);
      write_mixture_comments(os, "upper", mix->upper);
    }
    if (residuals) {
      for (const auto& e : residuals->entries)
        os << "# residual " << e.name << "=" << format_number(e.value) << "\n";
    }
    for (const auto& w : warnings) os << "# warning " << w << "\n";
    os << "x";
    if (ev.solution)
      for (std::size_t i = 0; i < c; ++i) os << ",F_" << i;
    os << ",cdf,pdf\n";
    for (std::size_t i = 0; i < grid.size(); ++i) {
      os << format_number(grid[i]);
      for (double v : comps[i]) os << "," << format_number(v);
      os << "," << format_number(cdf[i]) << "," << format_number(pdf[i]) << "\n";
    }
  }
  for (const auto& w : warnings) err << "warning: " << w << "\n";
  return kOk;
}

struct ValidateFlags {
  ParamFlags params;
  std::uint64_t events = 1'000'000;
  std::uint64_t seed = 1;
  int replications = 4;
  std::vector<double> grid;
  std::optional<double> sim_mu1;
  std::optional<double> sim_mu2;
};

/// For probabilities the standard error is floored at the binomial resolution
/// sqrt(p (1 - p) / n); batches that all read 0 or 1 otherwise give se = 0.
double z_score(double simulated, double analytic, const Estimate& e, double samples = 0.0) {
  const double diff = simulated - analytic;
  double se = e.standard_error();
  if (samples > 0.0) se = std::max(se, std::sqrt(analytic * (1.0 - analytic) / samples));
  if (se > 0.0) return diff / se;
  return diff == 0.0 ? 0.0 : std::copysign(INFINITY, diff);
}

int run_validate(const ValidateFlags& f, std::ostream& out, std::ostream& err) {
  const QueueParams p = checked(f.params);
  if (f.replications < 1) throw Error(ErrorKind::InvalidArgument, "--replications must be >= 1");
  const QueueParams sim_params = unchecked_params(p.c, p.lambda, f.sim_mu1.value_or(p.mu1),
                                                  f.sim_mu2.value_or(p.mu2), p.k);
  std::vector<double> grid = f.grid;
  if (grid.empty()) {
    for (double m : {0.25, 0.5, 1.0, 2.0, 3.0, 4.0, 6.0, 8.0}) grid.push_back(m * p.k);
  }
  std::sort(grid.begin(), grid.end());

  const Evaluator ev(p);
  SimConfig cfg;
  cfg.replications = f.replications;
  cfg.num_arrivals = (f.events + static_cast<std::uint64_t>(f.replications) - 1) /
                     static_cast<std::uint64_t>(f.replications);
  cfg.seed = f.seed;
  cfg.grid = grid;
  cfg.threads = static_cast<int>(worker_threads());
  const SimEstimate sim = simulate_replicated(sim_params, cfg);

  out << "# validate c=" << p.c << " lambda=" << format_number(p.lambda)
      << " mu1=" << format_number(p.mu1) << " mu2=" << format_number(p.mu2)
      << " k=" << format_number(p.k) << " sim_mu1=" << format_number(sim_params.mu1)
      << " sim_mu2=" << format_number(sim_params.mu2) << " events=" << f.events
      << " replications=" << f.replications << " seed=" << f.seed << "\n";
  out << "quantity,x,analytic,simulated,half_width,z\n";
  bool all_ok = true;
  const double samples = static_cast<double>(cfg.num_arrivals) * (1.0 - cfg.warmup_fraction) *
                         f.replications;
  const auto row = [&](const char* name, const std::string& x, double analytic, const Estimate& e,
                       bool probability) {
    const double z = z_score(e.value, analytic, e, probability ? samples : 0.0);
    all_ok = all_ok && std::abs(z) <= 4.0;
    out << name << "," << x << "," << format_number(analytic) << "," << format_number(e.value)
        << "," << format_number(e.half_width) << "," << format_number(z) << "\n";
  };
  for (std::size_t i = 0; i < grid.size(); ++i)
    row("cdf", format_number(grid[i]), ev.cdf(grid[i]), sim.cdf_points[i], true);
  row("p_wait_zero", "", 1.0 - ev.p_wait(), sim.p_wait_zero, true);
  row("mean", "", ev.mean(), sim.mean_wait, false);
  for (const auto& w : sim.warnings) err << "warning: " << w << "\n";
  if (!all_ok) {
    err << "statistical mismatch: some |z| > 4\n";
    return kStatistical;
  }
  return kOk;
}

struct SweepFlags {
  ParamFlags params;
  std::string sweep;
  std::string metrics = "mean";
  std::string out_path;
};

int run_sweep(const SweepFlags& f, std::ostream& out, std::ostream& err) {
  const SweepSpec spec = parse_sweep(f.sweep);
  const std::vector<Metric> metrics = parse_metrics(f.metrics);
  ParamFlags base = f.params;
  const auto require = [&](bool present, const char* name) {
    if (!present && spec.param != name)
      throw Error(ErrorKind::InvalidArgument, std::string("--") + name + " is required");
  };
  require(base.c.has_value(), "c");
  require(base.lambda.has_value(), "lambda");
  require(base.mu1.has_value(), "mu1");
  require(base.mu2.has_value(), "mu2");
  require(base.k.has_value(), "k");

  struct Row {
    std::string status = "ok";
    std::vector<double> values;
  };
  std::vector<Row> rows(spec.values.size());
  parallel_for(spec.values.size(), [&](std::size_t i) {
    ParamFlags pf = base;
    const double v = spec.values[i];
    if (spec.param == "c") {
      if (v != std::floor(v)) {
        rows[i].status = "nonpositive";
        return;
      }
      pf.c = static_cast<int>(v);
    } else if (spec.param == "lambda") {
      pf.lambda = v;
    } else if (spec.param == "mu1") {
      pf.mu1 = v;
    } else if (spec.param == "mu2") {
      pf.mu2 = v;
    } else {
      pf.k = v;
    }
    try {
      const Evaluator ev(checked(pf));
      for (const auto& m : metrics) {
        if (m.cdf_at) rows[i].values.push_back(ev.cdf(*m.cdf_at));
        else if (m.p_wait) rows[i].values.push_back(ev.p_wait());
        else rows[i].values.push_back(ev.mean());
      }
    } catch (const Error& e) {
      rows[i].status = lower(to_string(e.kind()));
      rows[i].values.clear();
    }
  });

  std::ofstream file;
  if (!f.out_path.empty()) {
    file.open(f.out_path);
    if (!file) throw Error(ErrorKind::InvalidArgument, "cannot open " + f.out_path);
  }
  std::ostream& os = f.out_path.empty() ? out : file;
  os << spec.param << ",status";
  for (const auto& m : metrics) os << "," << m.label;
  os << "\n";
  bool any_ok = false;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    os << format_number(spec.values[i]) << "," << rows[i].status;
    if (rows[i].status == "ok") {
      any_ok = true;
      for (double v : rows[i].values) os << "," << format_number(v);
    } else {
      for (std::size_t m = 0; m < metrics.size(); ++m) os << ",";
    }
    os << "\n";
  }
  if (!any_ok) {
    err << "error: every sweep point is invalid\n";
    return kValidation;
  }
  return kOk;
}

}  // namespace

std::vector<double> make_grid(const GridSpec& spec, double k) {
  if (!(spec.x_max > 0.0) || spec.points < 2) {
    throw Error(ErrorKind::InvalidArgument, "grid needs x_max > 0 and at least 2 points");
  }
  std::vector<double> grid(static_cast<std::size_t>(spec.points));
  const double last = spec.points - 1;
  for (int i = 0; i < spec.points; ++i) {
    const double t = i / last;
    grid[static_cast<std::size_t>(i)] =
        spec.spacing == Spacing::linear ? spec.x_max * t : spec.x_max * std::pow(10.0, -4.0 * (1.0 - t));
  }
  grid.back() = spec.x_max;
  const auto pos = std::lower_bound(grid.begin(), grid.end(), k);
  if (pos == grid.end() || *pos != k) grid.insert(pos, k);
  return grid;
}

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 15);
  return std::string(buf, res.ptr);
}

SweepSpec parse_sweep(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw Error(ErrorKind::InvalidArgument, "sweep must look like param=start:stop:steps");
  }
  SweepSpec spec;
  spec.param = text.substr(0, eq);
  static const std::vector<std::string> known{"c", "lambda", "mu1", "mu2", "k"};
  if (std::find(known.begin(), known.end(), spec.param) == known.end()) {
    throw Error(ErrorKind::InvalidArgument, "unknown sweep parameter " + spec.param);
  }
  const std::string body = text.substr(eq + 1);
  const auto number = [](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size()) throw Error(ErrorKind::InvalidArgument, "bad number '" + s + "'");
    return v;
  };
  if (body.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(body);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 3) throw Error(ErrorKind::InvalidArgument, "range must be start:stop:steps");
    const double start = number(parts[0]);
    const double stop = number(parts[1]);
    const double steps = number(parts[2]);
    if (steps < 2 || steps != std::floor(steps)) {
      throw Error(ErrorKind::InvalidArgument, "steps must be an integer >= 2");
    }
    const int n = static_cast<int>(steps);
    for (int i = 0; i < n; ++i) spec.values.push_back(start + (stop - start) * i / (n - 1));
  } else {
    std::stringstream ss(body);
    for (std::string p; std::getline(ss, p, ',');) spec.values.push_back(number(p));
  }
  if (spec.values.empty()) throw Error(ErrorKind::InvalidArgument, "empty sweep");
  return spec;
}

std::vector<Metric> parse_metrics(const std::string& text) {
  std::vector<Metric> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    Metric m;
    m.label = item;
    if (item == "mean") {
    } else if (item == "p_wait") {
      m.p_wait = true;
    } else if (item.rfind("cdf@", 0) == 0) {
      const std::string x = item.substr(4);
      char* end = nullptr;
      const double v = std::strtod(x.c_str(), &end);
      if (x.empty() || *end != '\0' || v < 0.0)
        throw Error(ErrorKind::InvalidArgument, "bad metric " + item);
      m.cdf_at = v;
    } else {
      throw Error(ErrorKind::InvalidArgument, "unknown metric " + item);
    }
    out.push_back(m);
  }
  if (out.empty()) throw Error(ErrorKind::InvalidArgument, "no metrics given");
  return out;
}

unsigned worker_threads() {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const char* env = std::getenv("VQT_THREADS");
  if (env == nullptr || *env == '\0') return hw;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 0) return hw;
  return v == 0 ? hw : static_cast<unsigned>(v);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stationary waiting-time distribution of an M/M/c queue whose service rate "
               "depends on the delay at arrival"};
  app.name("vqt");
  app.require_subcommand(1);

  SolveFlags solve_flags;
  CLI::App* solve_cmd = app.add_subcommand("solve", "Evaluate F(x), P(W <= x) and the density on a grid");
  add_param_flags(solve_cmd, solve_flags.params, true);
  solve_cmd->add_option("--grid-max", solve_flags.grid_max, "Largest grid point (default 10 k)");
  solve_cmd->add_option("--grid-points", solve_flags.grid_points, "Number of grid points")
      ->capture_default_str();
  solve_cmd->add_option("--spacing", solve_flags.spacing, "linear or log")
      ->check(CLI::IsMember({"linear", "log"}))
      ->capture_default_str();
  solve_cmd->add_option("--format", solve_flags.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  solve_cmd->add_option("--out", solve_flags.out_path, "Output file (default stdout)");
  solve_cmd->add_flag("--mean", solve_flags.mean, "Also report E[W]");
  solve_cmd->add_flag("--mixture", solve_flags.mixture, "Also report the exponential expansion");
  solve_cmd->add_flag("--verify", solve_flags.verify, "Also report residual checks");

  ValidateFlags validate_flags;
  CLI::App* validate_cmd =
      app.add_subcommand("validate", "Compare the analytic CDF against a simulation");
  add_param_flags(validate_cmd, validate_flags.params, true);
  validate_cmd->add_option("--events", validate_flags.events, "Total simulated arrivals")
      ->capture_default_str();
  validate_cmd->add_option("--seed", validate_flags.seed, "Base seed")->capture_default_str();
  validate_cmd->add_option("--replications", validate_flags.replications, "Independent runs")
      ->capture_default_str();
  validate_cmd->add_option("--grid", validate_flags.grid, "Comparison points x")->delimiter(',');
  validate_cmd->add_option("--sim-mu1", validate_flags.sim_mu1, "mu1 used by the simulation only");
  validate_cmd->add_option("--sim-mu2", validate_flags.sim_mu2, "mu2 used by the simulation only");

  SweepFlags sweep_flags;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Tabulate metrics over one parameter");
  add_param_flags(sweep_cmd, sweep_flags.params, false);
  sweep_cmd->add_option("--sweep", sweep_flags.sweep, "param=start:stop:steps or param=v1,v2,...")
      ->required();
  sweep_cmd->add_option("--metrics", sweep_flags.metrics, "Comma list of mean, p_wait, cdf@x")
      ->capture_default_str();
  sweep_cmd->add_option("--out", sweep_flags.out_path, "Output file (default stdout)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*solve_cmd) return run_solve(solve_flags, out, err);
    if (*validate_cmd) return run_validate(validate_flags, out, err);
    return run_sweep(sweep_flags, out, err);
  } catch (const Error& e) {
    return report_error(e, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kNumerical;
  }
}

}  // namespace vqt::cli
