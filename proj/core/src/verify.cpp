#include <algorithm>
#include <cmath>
#include <random>

#include <boost/math/quadrature/gauss.hpp>

#include "vqt/solver.hpp"

namespace vqt {

namespace {

double dot(const DenseMatrix& row, const std::vector<double>& col) {
  double s = 0.0;
  for (std::size_t i = 0; i < col.size(); ++i) s += row(0, i) * col[i];
  return s;
}

/// Right-hand side minus left-hand side of the lower-branch integro-differential equation.
double integro_differential_residual(const StationarySolution& sol, double x) {
  const ModelMatrices& m = sol.matrices;
  const std::size_t c = m.size();
  const double lambda = sol.params.lambda;

  // Composite Gauss-Legendre on panels short against the fastest exponential rate.
  using Rule = boost::math::quadrature::gauss<double, 20>;
  double rate = lambda;
  for (std::size_t i = 0; i < c; ++i) rate = std::max(rate, m.d_tilde_1(i, i));
  for (double t : sol.spectral.theta) rate = std::max(rate, std::abs(t));
  const int panels = std::max(1, static_cast<int>(std::ceil(x * rate / 4.0)));
  const double h = x / panels;
  DenseMatrix integral(1, c);
  const auto add = [&](double y, double w) {
    integral += (w * h / 2) * (eval_cdf(sol, y).components * m.b1 * tilde_q(1, x - y, m));
  };
  for (int p = 0; p < panels; ++p) {
    const double mid = (p + 0.5) * h;
    for (std::size_t i = 0; i < Rule::abscissa().size(); ++i) {
      const double a = Rule::abscissa()[i] * h / 2;
      add(mid - a, Rule::weights()[i]);
      add(mid + a, Rule::weights()[i]);
    }
  }
  const DenseMatrix id = DenseMatrix::identity(c);
  const DenseMatrix rhs = lambda * eval_cdf(sol, x).components - lambda * integral +
                          sol.f_prime_0 -
                          lambda * (sol.pi.back() * m.b1 * (id - tilde_q(1, x, m)) *
                                    m.d_tilde_1_inv);
  return max_abs_diff(eval_density(sol, x), rhs);
}

}  // namespace

double ResidualReport::max() const {
  double best = 0.0;
  for (const auto& e : entries) best = std::max(best, e.value);
  return best;
}

double ResidualReport::at(const std::string& name) const {
  for (const auto& e : entries)
    if (e.name == name) return e.value;
  throw Error(ErrorKind::InvalidArgument, "no residual named " + name);
}

double balance_residual(const StationarySolution& sol) {
  const int c = sol.params.c;
  const double lambda = sol.params.lambda;
  const double mu1 = sol.params.mu1;
  const double mu2 = sol.params.mu2;
  double worst = 0.0;
  for (int n = 0; n + 1 < c; ++n) {
    for (int i = 0; i <= n; ++i) {
      const int j = n - i;
      double lhs = (lambda + i * mu1 + j * mu2) * sol.pi_at(i, j);
      double rhs = (i + 1) * mu1 * sol.pi_at(i + 1, j) + (j + 1) * mu2 * sol.pi_at(i, j + 1);
      if (i > 0) rhs += lambda * sol.pi_at(i - 1, j);
      worst = std::max(worst, std::abs(lhs - rhs));
    }
  }
  return worst;
}

ResidualReport verify_solution(const StationarySolution& sol, unsigned seed) {
  const ModelMatrices& m = sol.matrices;
  const SpectralData& sp = sol.spectral;
  const std::size_t c = m.size();
  const double lambda = sol.params.lambda;
  const double k = sol.params.k;
  ResidualReport report;

  // The lower branch at k against the chain values and the upper branch's slope at 0+.
  const DenseMatrix lower_at_k = eval_cdf(sol, k).components;
  const DenseMatrix lower_slope_at_k = eval_density(sol, k);
  const DenseMatrix upper_slope_at_k =
      (sol.f_at_k - sol.upper_const) * sp.u2_minus.matrix + sol.upper_g;

  report.entries.push_back({"con1", eval_cdf(sol, 0.0).components.max_abs()});
  report.entries.push_back({"con2", max_abs_diff(lower_at_k, sol.f_at_k)});
  report.entries.push_back({"con3", std::max(max_abs_diff(lower_slope_at_k, upper_slope_at_k),
                                             max_abs_diff(lower_slope_at_k, sol.f_prime_at_k))});

  DenseMatrix boundary = sol.pi[c - 1] * (lambda * DenseMatrix::identity(c) + m.delta_top());
  if (c > 1) boundary -= lambda * (sol.pi[c - 2] * m.i_hat[c - 1]);
  report.entries.push_back({"con4", max_abs_diff(eval_density(sol, 0.0), boundary)});

  report.entries.push_back({"con5", balance_residual(sol)});

  const double normalization = sol.b_c + (sol.alpha1 * sol.m1).sum() + sol.pi_total();
  report.entries.push_back({"con6", std::abs(normalization - 1.0)});
  report.entries.push_back(
      {"normalization", std::abs(sol.pi_total() + sol.f_infinity.sum() - 1.0)});

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pick(0.02 * k, 0.98 * k);
  double worst = 0.0;
  for (int r = 0; r < 10; ++r) worst = std::max(worst, integro_differential_residual(sol, pick(rng)));
  report.entries.push_back({"integro_differential", worst});

  const double scale = std::max({1.0, sol.alpha0.max_abs(), sol.alpha1.max_abs()});
  report.entries.push_back({"orthogonality_phi", std::abs(dot(sol.alpha0, sp.phi_star_right)) / scale});
  report.entries.push_back({"orthogonality_psi", std::abs(dot(sol.alpha1, sp.psi_c_right)) / scale});
  return report;
}

}  // namespace vqt
