#pragma once

#include <string>
#include <vector>

#include "vqt/model.hpp"
#include "vqt/numerics.hpp"

namespace vqt {

/// Real roots of z^2 + p z + q = 0 with lower <= upper.
struct QuadraticRoots {
  double lower = 0.0;
  double upper = 0.0;
};

/// Cancellation-safe roots: the small-magnitude root is q / (large root).
/// Throws Error(InvalidArgument) on a negative discriminant.
QuadraticRoots stable_quadratic_roots(double p, double q);

/// P(z) = z^2 I - z (lambda I - D) + lambda (B - D).
DenseMatrix quadratic_pencil(double z, double lambda, const DenseMatrix& d_tilde,
                             const DenseMatrix& b);

/// Eigenvalues indexed by quadratic: entry i is the smaller root of quadratic i,
/// entry i + c the larger one. Row r of vectors is the left eigenvector for values[r].
struct Spectrum {
  std::vector<double> values;
  DenseMatrix vectors;
};

/// theta^2 - theta (lambda - (i+1) mu1 - (c-1-i) mu2) - (c-1-i) lambda mu2 = 0.
Spectrum compute_theta_spectrum(const QueueParams& params, const ModelMatrices& m);
/// beta^2 - beta (lambda - i mu1 - (c-i) mu2) - i lambda mu1 = 0.
Spectrum compute_beta_spectrum(const QueueParams& params, const ModelMatrices& m);

/// A solution U of the quadratic matrix equation together with its spectrum.
struct QuadraticSolution {
  DenseMatrix matrix;
  EigenSystem eigen;
};

struct SpectralData {
  std::vector<double> theta;
  DenseMatrix phi;
  std::vector<double> beta;
  DenseMatrix psi;
  /// e_{c-1} and e_0: left null vectors of B1 - D~1 and B2 - D~2.
  std::vector<double> phi_star;
  std::vector<double> psi_c;
  /// Matching right null vectors, unit infinity norm.
  std::vector<double> phi_star_right;
  std::vector<double> psi_c_right;
  QuadraticSolution u1_minus;
  QuadraticSolution u1_plus;
  QuadraticSolution u2_minus;
  QuadraticSolution u2_plus;
  std::vector<std::string> warnings;
};

/// Eigenvector matrices with condition above this raise an IllConditioned warning.
inline constexpr double kIllConditioned = 1e10;

/// U = Phi^-1 Theta Phi for the lower and upper halves of each spectrum. The
/// matrices are triangular and are solved entry-wise from the matrix equation;
/// the eigenvector rows only feed the attached EigenSystem.
void build_u_matrices(const QueueParams& params, const ModelMatrices& m, SpectralData& data);

struct NullVectors {
  std::vector<double> phi_star_right;
  std::vector<double> psi_c_right;
};

/// Throws Error(NullSpaceDimension) unless each null space is one-dimensional.
NullVectors null_right_vectors(const ModelMatrices& m);

SpectralData compute_spectral_data(const QueueParams& params, const ModelMatrices& m);

}  // namespace vqt
