#pragma once

#include <string>
#include <vector>

#include "vqt/error.hpp"
#include "vqt/numerics.hpp"

namespace vqt {

/// Relative guard used for every distinctness condition on the rates.
inline constexpr double kDegeneracyTolerance = 1e-9;

/// Which analytic model a parameter set maps onto. Equal service rates reduce
/// the system to a plain M/M/c queue.
enum class ModelKind { general, erlang_c };

/// Parameters of the M/M/c queue with a delay threshold k: customers whose
/// queueing delay on arrival is <= k are served at rate mu1, others at mu2.
struct QueueParams {
  int c = 1;
  double lambda = 0.0;
  double mu1 = 0.0;
  double mu2 = 0.0;
  double k = 0.0;
  ModelKind kind = ModelKind::general;

  /// lambda / (c mu2); the queue is stable iff this is < 1.
  double load() const { return lambda / (c * mu2); }
  /// max(lambda, c mu1, c mu2), the scale for relative degeneracy tests.
  double rate_scale() const;
};

enum class DegeneracyCondition {
  lambda_equals_c_mu1,
  lambda_equals_c_mu1_minus_mu2,
  lambda_equals_c_mu2_minus_mu1,
  mu1_near_mu2,
};

std::string to_string(DegeneracyCondition condition);

/// Raised for parameter sets where the exponential modes collide.
class DegenerateError : public Error {
 public:
  DegenerateError(DegeneracyCondition condition, QueueParams suggestion);

  DegeneracyCondition condition() const noexcept { return condition_; }
  /// Same parameters with mu1 scaled by (1 + 1e-7); for mu1 ~ mu2, mu1 becomes mu2 (1 + 1e-7).
  const QueueParams& suggestion() const noexcept { return suggestion_; }

 private:
  DegeneracyCondition condition_;
  QueueParams suggestion_;
};

/// Checks positivity, stability (lambda < c mu2) and non-degeneracy.
/// mu1 == mu2 exactly is accepted and tagged ModelKind::erlang_c.
/// Throws Error(NonPositive), Error(Unstable) or DegenerateError.
QueueParams validate_params(int c, double lambda, double mu1, double mu2, double k);

/// Positivity only; used by the simulator, which also accepts degenerate and
/// unstable parameter sets.
QueueParams unchecked_params(int c, double lambda, double mu1, double mu2, double k);

/// Generator blocks of the (W, S) process.
struct ModelMatrices {
  /// Upper bidiagonal: B1(i,i) = (i+1) mu1, B1(i,i+1) = (c-i-1) mu2.
  DenseMatrix b1;
  /// Lower bidiagonal: B2(i,i) = (c-i) mu2, B2(i,i-1) = i mu1.
  DenseMatrix b2;
  /// delta[i] = diag(j mu1 + (i-j) mu2, 0 <= j <= i).
  std::vector<DenseMatrix> delta;
  /// mu_kappa I + B_kappa^-1 Delta_{c-1} B_kappa.
  DenseMatrix d_tilde_1;
  DenseMatrix d_tilde_2;
  DenseMatrix d_tilde_1_inv;
  DenseMatrix d_tilde_2_inv;
  /// Rows of B_kappa are left eigenvectors of D~_kappa.
  EigenSystem d_tilde_1_eigen;
  EigenSystem d_tilde_2_eigen;
  /// b_hat[n] is (n+2) x (n+1) for 0 <= n <= c-1.
  std::vector<DenseMatrix> b_hat;
  /// i_hat[n] = (0 | I) of size n x (n+1) for 1 <= n <= c-1; i_hat[0] is empty.
  std::vector<DenseMatrix> i_hat;

  std::size_t size() const noexcept { return b1.rows(); }
  const DenseMatrix& delta_top() const { return delta.back(); }
};

ModelMatrices build_matrices(const QueueParams& params);

/// max(|D~1|, |D~2|) / rate_scale. Entries grow like (max mu / min mu)^(c-1).
double generator_growth(const QueueParams& params, const ModelMatrices& m);

/// Above this growth the solver warns that absolute accuracy near 1e-8 is not assured.
inline constexpr double kGrowthLimit = 1e4;

/// exp(-D~_kappa x) for kappa in {1, 2}.
DenseMatrix tilde_q(int kappa, double x, const ModelMatrices& m);

/// The matrix M with M (B1 - mu1 I - Delta_{c-1}) = B2 - mu2 I - Delta_{c-1}:
/// M(0,c-1) = c mu2, M(1,c-1) = mu1, M(i,i-1) = -(i/(c-i)) (mu1/mu2) for 0 < i <= c-1.
DenseMatrix class_exchange_matrix(const QueueParams& params);

}  // namespace vqt
