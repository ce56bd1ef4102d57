#pragma once

#include <array>
#include <string>
#include <vector>

#include "vqt/model.hpp"
#include "vqt/numerics.hpp"
#include "vqt/spectral.hpp"

namespace vqt {

/// Inverses that carry the particular solutions of the two ODE branches.
struct ParticularMatrices {
  /// (lambda (B1 - D~1) + diag(phi*))^-1
  DenseMatrix m0;
  /// (lambda (B2 - D~2) + diag(psi_c))^-1
  DenseMatrix m1;
  /// ((c mu1 + lambda)(c mu1 I - D~2) + lambda B2)^-1; blows up when -c mu1 nears a root of U2-.
  DenseMatrix m2;
  /// (-(c mu1 + lambda) I + D~2 + U2-)^-1, the bounded factor of m2 = w2 (-c mu1 I - U2-)^-1.
  DenseMatrix w2;
};

ParticularMatrices particular_matrices(const QueueParams& params, const ModelMatrices& m,
                                       const SpectralData& spectral);

/// The auxiliary matrices H1..H20 that reduce the boundary system to b_c.
struct HChain {
  std::array<DenseMatrix, 20> h;

  /// 1-based, matching the usual H1..H20 labels.
  const DenseMatrix& operator()(int index) const { return h.at(static_cast<std::size_t>(index - 1)); }
};

HChain h_chain(const QueueParams& params, const ModelMatrices& m, const SpectralData& spectral,
               const ParticularMatrices& pm);

/// Stationary law of the virtual queueing time. Row vectors are 1 x c matrices.
struct StationarySolution {
  QueueParams params;
  ModelMatrices matrices;
  SpectralData spectral;
  /// pi[n] = [pi(j, n-j), 0 <= j <= n], a 1 x (n+1) row.
  std::vector<DenseMatrix> pi;
  double b_c = 0.0;
  DenseMatrix f_prime_0;
  DenseMatrix f_at_k;
  DenseMatrix f_prime_at_k;
  DenseMatrix f_infinity;
  DenseMatrix alpha0;
  DenseMatrix alpha1;
  DenseMatrix alpha2;
  DenseMatrix m0;
  DenseMatrix m1;
  DenseMatrix m2;
  HChain h;
  /// h_hat[n] is c x (n+1).
  std::vector<DenseMatrix> h_hat;
  std::vector<std::string> warnings;

  /// F(x) = a_plus e^{U1+ x} - (a_plus + c0) e^{U1- x} + c0 on [0, k].
  DenseMatrix lower_a_plus;
  DenseMatrix lower_c0;
  /// F(k + y) = upper_a e^{U2- y} + upper_const + alpha2 Q~1(y) upper_n. The first and
  /// last terms cancel when -c mu1 is close to an eigenvalue of U2-.
  DenseMatrix upper_a;
  DenseMatrix upper_const;
  DenseMatrix upper_n;
  /// Same branch without the cancellation:
  /// F(k + y) = (f_at_k - upper_const) e^{U2- y} + upper_const + upper_g Phi(y),
  /// Phi(y) = int_0^y e^{U2- (y - s)} e^{-c mu1 s} ds.
  DenseMatrix upper_g;

  double pi_at(int i, int j) const { return pi.at(static_cast<std::size_t>(i + j))(0, static_cast<std::size_t>(i)); }
  /// P(W = 0).
  double pi_total() const;
};

/// Any pi(i,j) below this aborts the solve.
inline constexpr double kNegativeProbability = -1e-8;

/// Throws Error(InvalidArgument) for erlang_c parameter sets, Error(Singular)
/// and Error(NegativeProbability) on numerical breakdown.
StationarySolution solve(const QueueParams& params);

struct CdfValue {
  DenseMatrix components;
  double total = 0.0;
};

/// Components F(x) and P(W <= x) = sum pi + F(x) 1.
CdfValue eval_cdf(const StationarySolution& sol, double x);
/// Row vector F'(x); x = k returns the shared one-sided limit.
DenseMatrix eval_density(const StationarySolution& sol, double x);
/// E[W].
double mean_wait(const StationarySolution& sol);

struct MixtureTerm {
  double rate = 0.0;
  std::vector<double> weights;
};

/// F(x) = sum_t weights_t e^{rate_t (x - origin)} + constant on one branch.
struct BranchExpansion {
  std::vector<MixtureTerm> terms;
  std::vector<double> constant;
  double origin = 0.0;

  std::vector<double> evaluate(double x) const;
  std::vector<double> derivative(double x) const;
};

struct MixtureExpansion {
  BranchExpansion lower;
  BranchExpansion upper;
  std::vector<std::string> warnings;

  std::vector<double> evaluate(double x, double k) const {
    return x <= k ? lower.evaluate(x) : upper.evaluate(x);
  }
};

/// Expands both branches into scalar exponential modes. Zero-rate modes are
/// folded into the constant.
MixtureExpansion scalar_mixture(const StationarySolution& sol);

struct ResidualEntry {
  std::string name;
  double value = 0.0;
};

struct ResidualReport {
  std::vector<ResidualEntry> entries;

  double max() const;
  /// Throws Error(InvalidArgument) for an unknown name.
  double at(const std::string& name) const;
};

/// Boundary conditions, balance equations, normalization, the lower-branch
/// integro-differential equation at random points, and null-vector
/// orthogonality. Each entry is a max-abs residual.
ResidualReport verify_solution(const StationarySolution& sol, unsigned seed = 20240611u);

/// Balance equations of the idle-capacity states, max-abs residual.
double balance_residual(const StationarySolution& sol);

}  // namespace vqt
