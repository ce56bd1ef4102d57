#include "vqt/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace vqt {

namespace {

constexpr double kNullTolerance = 1e-9;

// A = lambda I - D~ and C = lambda (B - D~) of the matrix equation U^2 - U A + C = 0.
struct PencilBlocks {
  DenseMatrix a;
  DenseMatrix c;
  Triangle orientation;
};

PencilBlocks pencil_blocks(double lambda, const DenseMatrix& d_tilde, const DenseMatrix& b,
                           Triangle orientation) {
  const std::size_t n = d_tilde.rows();
  return {lambda * DenseMatrix::identity(n) - d_tilde, lambda * (b - d_tilde), orientation};
}

Spectrum pencil_spectrum(const QueueParams& params, const DenseMatrix& d_tilde,
                         const DenseMatrix& b, Triangle orientation,
                         const std::vector<QuadraticRoots>& roots) {
  const std::size_t c = roots.size();
  Spectrum s;
  s.values.resize(2 * c);
  s.vectors = DenseMatrix(2 * c, c);
  for (std::size_t i = 0; i < c; ++i) {
    s.values[i] = roots[i].lower;
    s.values[i + c] = roots[i].upper;
  }
  for (std::size_t r = 0; r < 2 * c; ++r) {
    const std::size_t i = r % c;
    const DenseMatrix p = quadratic_pencil(s.values[r], params.lambda, d_tilde, b);
    auto v = s.vectors.row_span(r);
    v[i] = 1.0;
    if (orientation == Triangle::upper) {
      for (std::size_t j = i + 1; j < c; ++j) {
        double acc = 0.0;
        for (std::size_t q = i; q < j; ++q) acc += v[q] * p(q, j);
        v[j] = -acc / p(j, j);
      }
    } else {
      for (std::size_t j = i; j-- > 0;) {
        double acc = 0.0;
        for (std::size_t q = j + 1; q <= i; ++q) acc += v[q] * p(q, j);
        v[j] = -acc / p(j, j);
      }
    }
  }
  return s;
}

// Entry-wise solution of U^2 - U A + C = 0 for a triangular U with the given diagonal.
// The pivot for entry (i,j) is u(i,i) minus the other root of quadratic j.
DenseMatrix triangular_quadratic_solution(const std::vector<double>& diag, const DenseMatrix& a,
                                          const DenseMatrix& cmat, Triangle orientation) {
  const std::size_t n = diag.size();
  DenseMatrix u(n, n);
  for (std::size_t i = 0; i < n; ++i) u(i, i) = diag[i];
  for (std::size_t gap = 1; gap < n; ++gap) {
    for (std::size_t s = 0; s + gap < n; ++s) {
      const std::size_t i = orientation == Triangle::upper ? s : s + gap;
      const std::size_t j = orientation == Triangle::upper ? s + gap : s;
      const std::size_t lo = std::min(i, j);
      const std::size_t hi = std::max(i, j);
      double rhs = -cmat(i, j);
      for (std::size_t l = lo + 1; l < hi; ++l) rhs -= u(i, l) * u(l, j);
      for (std::size_t l = lo; l <= hi; ++l)
        if (l != j) rhs += u(i, l) * a(l, j);
      u(i, j) = rhs / (u(i, i) + u(j, j) - a(j, j));
    }
  }
  return u;
}

QuadraticSolution half_solution(const std::vector<double>& values, const DenseMatrix& vectors,
                                std::size_t offset, const PencilBlocks& pencil, const char* name,
                                std::vector<std::string>& warnings) {
  const std::size_t c = vectors.cols();
  std::vector<double> part(values.begin() + offset, values.begin() + offset + c);
  DenseMatrix rows(c, c);
  for (std::size_t i = 0; i < c; ++i)
    for (std::size_t j = 0; j < c; ++j) rows(i, j) = vectors(offset + i, j);
  QuadraticSolution u;
  u.matrix = triangular_quadratic_solution(part, pencil.a, pencil.c, pencil.orientation);
  u.eigen = EigenSystem::from_left_vectors(std::move(part), std::move(rows));
  if (!(u.eigen.condition <= kIllConditioned)) {
    std::ostringstream os;
    os << "IllConditioned: eigenvector matrix of " << name << " has condition "
       << u.eigen.condition;
    warnings.push_back(os.str());
  }
  return u;
}

std::vector<double> triangular_null_vector(const DenseMatrix& a, Triangle orientation,
                                           const char* name) {
  const std::size_t n = a.rows();
  const double guard = kNullTolerance * std::max(a.norm_inf(), 1e-300);
  std::size_t zero = n;
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(a(i, i)) <= guard) {
      zero = i;
      ++count;
    }
  }
  if (count != 1) {
    throw Error(ErrorKind::NullSpaceDimension, std::string(name) + " has null space dimension " +
                                                   std::to_string(count) + ", expected 1");
  }
  std::vector<double> x(n, 0.0);
  x[zero] = 1.0;
  if (orientation == Triangle::upper) {
    for (std::size_t i = zero; i-- > 0;) {
      double acc = 0.0;
      for (std::size_t j = i + 1; j <= zero; ++j) acc += a(i, j) * x[j];
      x[i] = -acc / a(i, i);
    }
  } else {
    for (std::size_t i = zero + 1; i < n; ++i) {
      double acc = 0.0;
      for (std::size_t j = zero; j < i; ++j) acc += a(i, j) * x[j];
      x[i] = -acc / a(i, i);
    }
  }
  double norm = 0.0;
  for (double v : x) norm = std::max(norm, std::abs(v));
  for (double& v : x) v /= norm;
  return x;
}

}  // namespace

QuadraticRoots stable_quadratic_roots(double p, double q) {
  const double disc = p * p - 4.0 * q;
  if (disc < 0.0) {
    throw Error(ErrorKind::InvalidArgument, "quadratic has complex roots");
  }
  const double big = -0.5 * (p + std::copysign(std::sqrt(disc), p));
  if (big == 0.0) return {0.0, 0.0};
  const double small = q / big;
  return big < small ? QuadraticRoots{big, small} : QuadraticRoots{small, big};
}

DenseMatrix quadratic_pencil(double z, double lambda, const DenseMatrix& d_tilde,
                             const DenseMatrix& b) {
  const std::size_t n = d_tilde.rows();
  DenseMatrix p = (z * z) * DenseMatrix::identity(n);
  p -= z * (lambda * DenseMatrix::identity(n) - d_tilde);
  p += lambda * (b - d_tilde);
  return p;
}

Spectrum compute_theta_spectrum(const QueueParams& params, const ModelMatrices& m) {
  const int c = params.c;
  std::vector<QuadraticRoots> roots(static_cast<std::size_t>(c));
  for (int i = 0; i < c; ++i) {
    const double linear = params.lambda - (i + 1) * params.mu1 - (c - 1 - i) * params.mu2;
    const double constant = -(c - 1 - i) * params.lambda * params.mu2;
    roots[static_cast<std::size_t>(i)] = stable_quadratic_roots(-linear, constant);
  }
  return pencil_spectrum(params, m.d_tilde_1, m.b1, Triangle::upper, roots);
}

Spectrum compute_beta_spectrum(const QueueParams& params, const ModelMatrices& m) {
  const int c = params.c;
  std::vector<QuadraticRoots> roots(static_cast<std::size_t>(c));
  for (int i = 0; i < c; ++i) {
    const double linear = params.lambda - i * params.mu1 - (c - i) * params.mu2;
    const double constant = -i * params.lambda * params.mu1;
    roots[static_cast<std::size_t>(i)] = stable_quadratic_roots(-linear, constant);
  }
  return pencil_spectrum(params, m.d_tilde_2, m.b2, Triangle::lower, roots);
}

void build_u_matrices(const QueueParams& params, const ModelMatrices& m, SpectralData& data) {
  const std::size_t c = data.phi.cols();
  const PencilBlocks first = pencil_blocks(params.lambda, m.d_tilde_1, m.b1, Triangle::upper);
  const PencilBlocks second = pencil_blocks(params.lambda, m.d_tilde_2, m.b2, Triangle::lower);
  data.u1_minus = half_solution(data.theta, data.phi, 0, first, "U1-", data.warnings);
  data.u1_plus = half_solution(data.theta, data.phi, c, first, "U1+", data.warnings);
  data.u2_minus = half_solution(data.beta, data.psi, 0, second, "U2-", data.warnings);
  data.u2_plus = half_solution(data.beta, data.psi, c, second, "U2+", data.warnings);
}

NullVectors null_right_vectors(const ModelMatrices& m) {
  return {triangular_null_vector(m.b1 - m.d_tilde_1, Triangle::upper, "B1 - D~1"),
          triangular_null_vector(m.b2 - m.d_tilde_2, Triangle::lower, "B2 - D~2")};
}

SpectralData compute_spectral_data(const QueueParams& params, const ModelMatrices& m) {
  const auto c = static_cast<std::size_t>(params.c);
  SpectralData data;
  Spectrum theta = compute_theta_spectrum(params, m);
  Spectrum beta = compute_beta_spectrum(params, m);
  data.theta = std::move(theta.values);
  data.phi = std::move(theta.vectors);
  data.beta = std::move(beta.values);
  data.psi = std::move(beta.vectors);
  data.phi_star.assign(c, 0.0);
  data.phi_star[c - 1] = 1.0;
  data.psi_c.assign(c, 0.0);
  data.psi_c[0] = 1.0;
  NullVectors nv = null_right_vectors(m);
  data.phi_star_right = std::move(nv.phi_star_right);
  data.psi_c_right = std::move(nv.psi_c_right);
  build_u_matrices(params, m, data);
  return data;
}

}  // namespace vqt
