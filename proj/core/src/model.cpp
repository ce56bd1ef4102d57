#include "vqt/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace vqt {

namespace {

std::string describe(const QueueParams& p) {
  std::ostringstream os;
  os.precision(15);
  os << "c=" << p.c << " lambda=" << p.lambda << " mu1=" << p.mu1 << " mu2=" << p.mu2
     << " k=" << p.k;
  return os.str();
}

std::string degenerate_message(DegeneracyCondition condition, const QueueParams& suggestion) {
  return "distinctness condition " + to_string(condition) +
         " violated; suggested perturbation: " + describe(suggestion);
}

}  // namespace

double QueueParams::rate_scale() const {
  return std::max({lambda, c * mu1, c * mu2});
}

std::string to_string(DegeneracyCondition condition) {
  switch (condition) {
    case DegeneracyCondition::lambda_equals_c_mu1: return "lambda=c*mu1";
    case DegeneracyCondition::lambda_equals_c_mu1_minus_mu2: return "lambda=c*(mu1-mu2)";
    case DegeneracyCondition::lambda_equals_c_mu2_minus_mu1: return "lambda=c*(mu2-mu1)";
    case DegeneracyCondition::mu1_near_mu2: return "mu1=mu2";
  }
  return "unknown";
}

DegenerateError::DegenerateError(DegeneracyCondition condition, QueueParams suggestion)
    : Error(ErrorKind::Degenerate, degenerate_message(condition, suggestion)),
      condition_(condition),
      suggestion_(suggestion) {}

QueueParams unchecked_params(int c, double lambda, double mu1, double mu2, double k) {
  if (c < 1) throw Error(ErrorKind::NonPositive, "server count c must be >= 1");
  const auto check = [](double v, const char* name) {
    if (!std::isfinite(v)) {
      throw Error(ErrorKind::NonPositive, std::string(name) + " must be a finite number");
    }
    if (!(v > 0.0)) {
      throw Error(ErrorKind::NonPositive, std::string(name) + " must be > 0");
    }
  };
  check(lambda, "lambda");
  check(mu1, "mu1");
  check(mu2, "mu2");
  check(k, "k");
  QueueParams p{c, lambda, mu1, mu2, k, ModelKind::general};
  if (mu1 == mu2) p.kind = ModelKind::erlang_c;
  return p;
}

QueueParams validate_params(int c, double lambda, double mu1, double mu2, double k) {
  QueueParams p = unchecked_params(c, lambda, mu1, mu2, k);
  if (!(p.load() < 1.0)) {
    std::ostringstream os;
    os.precision(15);
    os << "lambda/(c*mu2) = " << p.load() << " >= 1";
    throw Error(ErrorKind::Unstable, os.str());
  }
  if (p.kind == ModelKind::erlang_c) return p;

  const double eps = kDegeneracyTolerance * p.rate_scale();
  QueueParams suggestion = p;
  suggestion.mu1 = mu1 * (1.0 + 1e-7);
  if (std::abs(lambda - c * mu1) <= eps)
    throw DegenerateError(DegeneracyCondition::lambda_equals_c_mu1, suggestion);
  if (std::abs(lambda - c * (mu1 - mu2)) <= eps)
    throw DegenerateError(DegeneracyCondition::lambda_equals_c_mu1_minus_mu2, suggestion);
  if (std::abs(lambda - c * (mu2 - mu1)) <= eps)
    throw DegenerateError(DegeneracyCondition::lambda_equals_c_mu2_minus_mu1, suggestion);
  if (std::abs(mu1 - mu2) <= eps) {
    suggestion.mu1 = mu2 * (1.0 + 1e-7);
    throw DegenerateError(DegeneracyCondition::mu1_near_mu2, suggestion);
  }
  return p;
}

ModelMatrices build_matrices(const QueueParams& params) {
  const auto c = static_cast<std::size_t>(params.c);
  const double mu1 = params.mu1;
  const double mu2 = params.mu2;

  ModelMatrices m;
  m.b1 = DenseMatrix(c, c);
  m.b2 = DenseMatrix(c, c);
  for (std::size_t i = 0; i < c; ++i) {
    m.b1(i, i) = static_cast<double>(i + 1) * mu1;
    if (i + 1 < c) m.b1(i, i + 1) = static_cast<double>(c - i - 1) * mu2;
    m.b2(i, i) = static_cast<double>(c - i) * mu2;
    if (i > 0) m.b2(i, i - 1) = static_cast<double>(i) * mu1;
  }

  m.delta.reserve(c);
  for (std::size_t n = 0; n < c; ++n) {
    std::vector<double> d(n + 1);
    for (std::size_t j = 0; j <= n; ++j)
      d[j] = static_cast<double>(j) * mu1 + static_cast<double>(n - j) * mu2;
    m.delta.push_back(DenseMatrix::diagonal(d));
  }
  const DenseMatrix& top = m.delta.back();

  const DenseMatrix b1_inv = triangular_inverse(m.b1, Triangle::upper);
  const DenseMatrix b2_inv = triangular_inverse(m.b2, Triangle::lower);
  m.d_tilde_1 = mu1 * DenseMatrix::identity(c) + b1_inv * top * m.b1;
  m.d_tilde_2 = mu2 * DenseMatrix::identity(c) + b2_inv * top * m.b2;
  m.d_tilde_1_inv = triangular_inverse(m.d_tilde_1, Triangle::upper);
  m.d_tilde_2_inv = triangular_inverse(m.d_tilde_2, Triangle::lower);

  std::vector<double> ev1(c), ev2(c);
  for (std::size_t j = 0; j < c; ++j) {
    ev1[j] = mu1 + top(j, j);
    ev2[j] = mu2 + top(j, j);
  }
  // B_kappa D~_kappa = (mu_kappa I + Delta_{c-1}) B_kappa, so rows of B_kappa
  // are exact left eigenvectors.
  m.d_tilde_1_eigen = EigenSystem{ev1, m.b1, b1_inv, m.b1.norm_inf() * b1_inv.norm_inf()};
  m.d_tilde_2_eigen = EigenSystem{ev2, m.b2, b2_inv, m.b2.norm_inf() * b2_inv.norm_inf()};

  m.b_hat.reserve(c);
  m.i_hat.reserve(c);
  for (std::size_t n = 0; n < c; ++n) {
    DenseMatrix bh(n + 2, n + 1);
    for (std::size_t i = 0; i <= n; ++i) bh(i, i) = static_cast<double>(n - i + 1) * mu2;
    for (std::size_t i = 1; i <= n + 1; ++i) bh(i, i - 1) = static_cast<double>(i) * mu1;
    m.b_hat.push_back(std::move(bh));

    DenseMatrix ih(n, n + 1);
    for (std::size_t i = 0; i < n; ++i) ih(i, i + 1) = 1.0;
    m.i_hat.push_back(std::move(ih));
  }
  return m;
}

double generator_growth(const QueueParams& params, const ModelMatrices& m) {
  return std::max(m.d_tilde_1.max_abs(), m.d_tilde_2.max_abs()) / params.rate_scale();
}

DenseMatrix tilde_q(int kappa, double x, const ModelMatrices& m) {
  if (kappa != 1 && kappa != 2) throw Error(ErrorKind::InvalidArgument, "kappa must be 1 or 2");
  if (x < 0.0) throw Error(ErrorKind::InvalidArgument, "tilde_q requires x >= 0");
  return kappa == 1 ? exp_times(m.d_tilde_1, m.d_tilde_1_eigen, -x)
                    : exp_times(m.d_tilde_2, m.d_tilde_2_eigen, -x);
}

DenseMatrix class_exchange_matrix(const QueueParams& params) {
  const auto c = static_cast<std::size_t>(params.c);
  DenseMatrix m(c, c);
  m(0, c - 1) = params.c * params.mu2;
  if (c >= 2) m(1, c - 1) += params.mu1;
  for (std::size_t i = 1; i < c; ++i)
    m(i, i - 1) += -(static_cast<double>(i) / static_cast<double>(c - i)) *
                   (params.mu1 / params.mu2);
  return m;
}

}  // namespace vqt
