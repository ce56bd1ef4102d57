#include "vqt/solver.hpp"

#include <cmath>
#include <sstream>

namespace vqt {

namespace {

DenseMatrix expm(const QuadraticSolution& u, double x) { return exp_times(u.matrix, u.eigen, x); }

DenseMatrix ones_column(std::size_t n) { return DenseMatrix(n, 1, 1.0); }

/// B1 D~1^-1 D~2 - B2.
DenseMatrix class_shift(const ModelMatrices& m) {
  return m.b1 * m.d_tilde_1_inv * m.d_tilde_2 - m.b2;
}

}  // namespace

ParticularMatrices particular_matrices(const QueueParams& params, const ModelMatrices& m,
                                       const SpectralData& spectral) {
  const std::size_t c = m.size();
  const DenseMatrix id = DenseMatrix::identity(c);
  const double lambda = params.lambda;
  ParticularMatrices pm;
  pm.m0 = inverse(lambda * (m.b1 - m.d_tilde_1) + DenseMatrix::diagonal(spectral.phi_star));
  pm.m1 = inverse(lambda * (m.b2 - m.d_tilde_2) + DenseMatrix::diagonal(spectral.psi_c));
  const double cm1 = params.c * params.mu1;
  pm.m2 = inverse((cm1 + lambda) * (cm1 * id - m.d_tilde_2) + lambda * m.b2);
  pm.w2 = triangular_inverse(m.d_tilde_2 + spectral.u2_minus.matrix - (cm1 + lambda) * id,
                             Triangle::lower);
  return pm;
}

HChain h_chain(const QueueParams& params, const ModelMatrices& m, const SpectralData& spectral,
               const ParticularMatrices& pm) {
  const std::size_t c = m.size();
  const double lambda = params.lambda;
  const double k = params.k;
  const DenseMatrix id = DenseMatrix::identity(c);
  const DenseMatrix& u1m = spectral.u1_minus.matrix;
  const DenseMatrix& u1p = spectral.u1_plus.matrix;
  const DenseMatrix& u2m = spectral.u2_minus.matrix;
  const DenseMatrix e_plus = expm(spectral.u1_plus, k);
  const DenseMatrix e_minus = expm(spectral.u1_minus, k);
  const DenseMatrix gap_inv = inverse(u1p - u1m);
  const DenseMatrix u2m_inv = triangular_inverse(u2m, Triangle::lower);
  const DenseMatrix x_shift = class_shift(m);
  const DenseMatrix& dt1 = m.d_tilde_1;
  const DenseMatrix& dt2 = m.d_tilde_2;

  HChain hc;
  auto& h = hc.h;
  h[0] = gap_inv * (e_plus - e_minus);
  h[1] = pm.m0 * (id - e_minus + u1m * h[0]);
  h[2] = h[0] + dt1 * h[1];
  h[3] = -lambda * (m.b1 * h[1]);
  h[4] = gap_inv * (u1p * e_plus - u1m * e_minus);
  h[5] = pm.m0 * (u1m * e_minus - u1m * h[4]);
  h[6] = h[4] - dt1 * h[5];
  h[7] = lambda * (m.b1 * h[5]);
  // (D~1 - D~2) m2 U2- + D~1 (D~1 - D~2) m2, using D~1 (D~1 - D~2) = c mu1 (D~1 - D~2).
  h[8] = -((dt1 - dt2) * pm.w2);
  h[9] = u2m - lambda * ((id - m.b2 * m.d_tilde_2_inv) * h[8]);
  h[10] = pm.m1 * u2m + m.d_tilde_2_inv * h[8];
  h[11] = h[9] + lambda * (x_shift * h[10]);
  h[12] = dt2 * h[10];
  h[13] = lambda * (m.b1 * m.d_tilde_1_inv * dt2 * h[10]);
  h[14] = u2m * inverse(h[6] - h[6] * h[8] - h[2] * h[11] + h[12]);
  h[15] = (h[13] + h[3] * h[11] - h[7] + h[7] * h[8]) * u2m_inv * h[14];
  h[16] = dt2 * pm.m1 - lambda * (h[2] * x_shift * pm.m1);
  h[17] = lambda * (m.b1 * m.d_tilde_1_inv * dt2 * pm.m1) + lambda * (h[3] * x_shift * pm.m1);
  h[18] = id - h[14] * h[16];
  h[19] = h[15] * h[16] - h[17];
  return hc;
}

double StationarySolution::pi_total() const {
  double s = 0.0;
  for (const auto& level : pi) s += level.sum();
  return s;
}

StationarySolution solve(const QueueParams& params) {
  if (params.kind == ModelKind::erlang_c) {
    throw Error(ErrorKind::InvalidArgument,
                "mu1 == mu2 reduces to the Erlang-C model; use reference::erlang_c");
  }
  StationarySolution sol;
  sol.params = params;
  sol.matrices = build_matrices(params);
  sol.spectral = compute_spectral_data(params, sol.matrices);
  sol.warnings = sol.spectral.warnings;
  if (const double growth = generator_growth(params, sol.matrices); growth > kGrowthLimit) {
    std::ostringstream os;
    os << "IllConditioned: generator entries reach " << growth
       << " times the rate scale; absolute accuracy near 1e-8 is not assured";
    sol.warnings.push_back(os.str());
  }

  const ModelMatrices& m = sol.matrices;
  const SpectralData& sp = sol.spectral;
  const std::size_t c = m.size();
  const double lambda = params.lambda;
  const DenseMatrix id = DenseMatrix::identity(c);

  const ParticularMatrices pm = particular_matrices(params, m, sp);
  sol.m0 = pm.m0;
  sol.m1 = pm.m1;
  sol.m2 = pm.m2;
  sol.h = h_chain(params, m, sp, pm);
  const HChain& h = sol.h;

  // Level recursion: pi_{n+1} C_n = pi_n, closed at the top by the F'(0) relation.
  std::vector<DenseMatrix> chat(c);
  const DenseMatrix& top = m.delta_top();
  if (c == 1) {
    chat[0] = -1.0 * (h(15) * inverse(lambda * id + top - h(16)));
  } else {
    chat[0] = (1.0 / lambda) * m.b_hat[0];
    for (std::size_t n = 1; n + 1 < c; ++n) {
      const DenseMatrix idn = DenseMatrix::identity(n + 1);
      chat[n] = m.b_hat[n] * inverse(lambda * (idn - chat[n - 1] * m.i_hat[n]) + m.delta[n]);
    }
    chat[c - 1] = -1.0 * (h(15) * inverse(lambda * (id - chat[c - 2] * m.i_hat[c - 1]) + top -
                                          h(16)));
  }
  sol.h_hat.assign(c, DenseMatrix());
  sol.h_hat[c - 1] = chat[c - 1];
  for (std::size_t n = c - 1; n-- > 0;) sol.h_hat[n] = sol.h_hat[n + 1] * chat[n];

  const DenseMatrix psi_c = DenseMatrix::row_vector(sp.psi_c);
  double inv_bc = (psi_c * (h(19) + sol.h_hat[c - 1] * h(20)) * ones_column(c))(0, 0);
  for (std::size_t n = 0; n < c; ++n)
    inv_bc += (psi_c * sol.h_hat[n] * ones_column(n + 1))(0, 0);
  sol.b_c = 1.0 / inv_bc;

  sol.pi.resize(c);
  for (std::size_t n = 0; n < c; ++n) sol.pi[n] = sol.b_c * (psi_c * sol.h_hat[n]);
  for (std::size_t n = 0; n < c; ++n)
    for (std::size_t j = 0; j <= n; ++j)
      if (sol.pi[n](0, j) < kNegativeProbability) {
        std::ostringstream os;
        os << "pi(" << j << "," << n - j << ") = " << sol.pi[n](0, j);
        throw Error(ErrorKind::NegativeProbability, os.str());
      }

  const DenseMatrix& pi_top = sol.pi[c - 1];
  const DenseMatrix bc_psi = sol.b_c * psi_c;
  sol.f_prime_0 = pi_top * h(16) - bc_psi * h(15);
  sol.f_at_k = sol.f_prime_0 * h(3) + pi_top * h(4);
  sol.f_prime_at_k = sol.f_prime_0 * h(7) + pi_top * h(8);
  sol.alpha0 = sol.f_prime_0 * m.d_tilde_1 - lambda * (pi_top * m.b1);
  sol.alpha1 = sol.alpha0 * m.d_tilde_1_inv * m.d_tilde_2 - lambda * (sol.f_at_k * class_shift(m));
  sol.alpha2 = sol.alpha1 * m.d_tilde_2_inv - sol.f_prime_at_k +
               lambda * (sol.f_at_k * (id - m.b2 * m.d_tilde_2_inv));
  sol.f_infinity = pi_top * h(20) + bc_psi * h(19);

  const DenseMatrix& u1m = sp.u1_minus.matrix;
  const DenseMatrix& u1p = sp.u1_plus.matrix;
  sol.lower_c0 = sol.alpha0 * pm.m0;
  sol.lower_a_plus = (sol.f_prime_0 + sol.lower_c0 * u1m) * inverse(u1p - u1m);
  sol.upper_n = (m.d_tilde_1 - m.d_tilde_2) * pm.m2;
  sol.upper_const = bc_psi + sol.alpha1 * pm.m1;
  sol.upper_a = sol.f_at_k - sol.upper_const - sol.alpha2 * sol.upper_n;
  sol.upper_g = sol.alpha2 * (m.d_tilde_1 - m.d_tilde_2) * pm.w2;
  return sol;
}

namespace {

/// e^{U2- y} and Phi(y) from one block exponential.
struct UpperPropagators {
  DenseMatrix exp_u;
  DenseMatrix phi;
};

UpperPropagators upper_propagators(const StationarySolution& sol, double y) {
  const DenseMatrix& u = sol.spectral.u2_minus.matrix;
  const std::size_t c = u.rows();
  const double z0 = -sol.params.c * sol.params.mu1;
  DenseMatrix block(2 * c, 2 * c);
  for (std::size_t i = 0; i < c; ++i) {
    for (std::size_t j = 0; j < c; ++j) block(i, j) = u(i, j) * y;
    block(i, c + i) = y;
    block(c + i, c + i) = z0 * y;
  }
  const DenseMatrix e = expm(block);
  UpperPropagators out{DenseMatrix(c, c), DenseMatrix(c, c)};
  for (std::size_t i = 0; i < c; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      out.exp_u(i, j) = e(i, j);
      out.phi(i, j) = e(i, c + j);
    }
  }
  return out;
}

}  // namespace

CdfValue eval_cdf(const StationarySolution& sol, double x) {
  if (!(x >= 0.0)) throw Error(ErrorKind::InvalidArgument, "eval_cdf requires x >= 0");
  const SpectralData& sp = sol.spectral;
  CdfValue out;
  if (x <= sol.params.k) {
    out.components = sol.lower_a_plus * expm(sp.u1_plus, x) -
                     (sol.lower_a_plus + sol.lower_c0) * expm(sp.u1_minus, x) + sol.lower_c0;
  } else {
    const UpperPropagators up = upper_propagators(sol, x - sol.params.k);
    out.components = (sol.f_at_k - sol.upper_const) * up.exp_u + sol.upper_const +
                     sol.upper_g * up.phi;
  }
  out.total = sol.pi_total() + out.components.sum();
  return out;
}

DenseMatrix eval_density(const StationarySolution& sol, double x) {
  if (!(x >= 0.0)) throw Error(ErrorKind::InvalidArgument, "eval_density requires x >= 0");
  const SpectralData& sp = sol.spectral;
  if (x <= sol.params.k) {
    return sol.lower_a_plus * sp.u1_plus.matrix * expm(sp.u1_plus, x) -
           (sol.lower_a_plus + sol.lower_c0) * sp.u1_minus.matrix * expm(sp.u1_minus, x);
  }
  const UpperPropagators up = upper_propagators(sol, x - sol.params.k);
  const double z0 = -sol.params.c * sol.params.mu1;
  return (sol.f_at_k - sol.upper_const) * sp.u2_minus.matrix * up.exp_u +
         sol.upper_g * (up.exp_u + z0 * up.phi);
}

double mean_wait(const StationarySolution& sol) {
  const SpectralData& sp = sol.spectral;
  const ModelMatrices& m = sol.matrices;
  const std::size_t c = m.size();
  const double k = sol.params.k;
  const DenseMatrix id = DenseMatrix::identity(c);
  const DenseMatrix one = ones_column(c);
  const DenseMatrix u2m_inv = triangular_inverse(sp.u2_minus.matrix, Triangle::lower);

  const DenseMatrix lower = sol.lower_a_plus * i_kernel(0.0, k, sp.u1_plus.matrix, sp.u1_plus.eigen) -
                            (sol.lower_a_plus + sol.lower_c0) * i_kernel(0.0, k, sp.u1_minus.matrix, sp.u1_minus.eigen);
  const double z0 = -sol.params.c * sol.params.mu1;
  const DenseMatrix upper = (sol.f_at_k - sol.upper_const) * (u2m_inv - k * id) -
                            (1.0 / z0) * (sol.upper_g * u2m_inv);
  return ((lower + upper) * one)(0, 0);
}

std::vector<double> BranchExpansion::evaluate(double x) const {
  std::vector<double> out = constant;
  for (const auto& t : terms) {
    const double e = std::exp(t.rate * (x - origin));
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += t.weights[j] * e;
  }
  return out;
}

std::vector<double> BranchExpansion::derivative(double x) const {
  std::vector<double> out(constant.size(), 0.0);
  for (const auto& t : terms) {
    const double e = t.rate * std::exp(t.rate * (x - origin));
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += t.weights[j] * e;
  }
  return out;
}

namespace {

/// coefficient * inverse_vectors, spread over the rows of left_vectors.
void append_modes(BranchExpansion& branch, const DenseMatrix& coefficient, const EigenSystem& es,
                  double rate_sign) {
  const DenseMatrix w = coefficient * es.inverse_vectors;
  for (std::size_t r = 0; r < es.size(); ++r) {
    std::vector<double> weights = es.left_vectors.row(r);
    for (double& v : weights) v *= w(0, r);
    const double rate = rate_sign * es.values[r];
    if (rate == 0.0) {
      for (std::size_t j = 0; j < weights.size(); ++j) branch.constant[j] += weights[j];
    } else {
      branch.terms.push_back({rate, std::move(weights)});
    }
  }
}

}  // namespace

MixtureExpansion scalar_mixture(const StationarySolution& sol) {
  const SpectralData& sp = sol.spectral;
  const ModelMatrices& m = sol.matrices;
  MixtureExpansion mix;
  mix.warnings = sp.warnings;

  mix.lower.origin = 0.0;
  mix.lower.constant = sol.lower_c0.to_vector();
  append_modes(mix.lower, sol.lower_a_plus, sp.u1_plus.eigen, 1.0);
  append_modes(mix.lower, -1.0 * (sol.lower_a_plus + sol.lower_c0), sp.u1_minus.eigen, 1.0);

  mix.upper.origin = sol.params.k;
  mix.upper.constant = sol.upper_const.to_vector();
  append_modes(mix.upper, sol.upper_a, sp.u2_minus.eigen, 1.0);
  // alpha2 Q~1(y) N = alpha2 B1^-1 e^{-Lambda y} B1 N.
  EigenSystem q1 = m.d_tilde_1_eigen;
  q1.left_vectors = q1.left_vectors * sol.upper_n;
  append_modes(mix.upper, sol.alpha2, q1, -1.0);
  return mix;
}

}  // namespace vqt
