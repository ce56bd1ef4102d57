#pragma once

// Small dense linear-algebra kernel. Every matrix in the solver is either
// triangular or similar to a triangular matrix with a known real spectrum,
// so matrix functions go through explicit eigen-decompositions.

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace vqt {

/// Row-major dense real matrix. Row vectors are 1 x n matrices.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  DenseMatrix(std::initializer_list<std::initializer_list<double>> rows);

  static DenseMatrix identity(std::size_t n);
  static DenseMatrix diagonal(std::span<const double> values);
  static DenseMatrix row_vector(std::span<const double> values);
  static DenseMatrix column_vector(std::span<const double> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool is_square() const noexcept { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) { return entries_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return entries_[i * cols_ + j]; }

  std::span<const double> entries() const noexcept { return entries_; }
  std::span<double> row_span(std::size_t i) { return {entries_.data() + i * cols_, cols_}; }
  std::span<const double> row_span(std::size_t i) const {
    return {entries_.data() + i * cols_, cols_};
  }

  /// Copies row i into a plain vector.
  std::vector<double> row(std::size_t i) const;
  /// All entries of a 1 x n or n x 1 matrix.
  std::vector<double> to_vector() const { return entries_; }

  DenseMatrix transpose() const;
  std::vector<double> diagonal_entries() const;

  /// Max absolute row sum.
  double norm_inf() const;
  double max_abs() const;
  /// Sum of all entries; for a row vector this is v . 1.
  double sum() const;

  DenseMatrix& operator+=(const DenseMatrix& other);
  DenseMatrix& operator-=(const DenseMatrix& other);
  DenseMatrix& operator*=(double scalar);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> entries_;
};

DenseMatrix operator+(DenseMatrix lhs, const DenseMatrix& rhs);
DenseMatrix operator-(DenseMatrix lhs, const DenseMatrix& rhs);
DenseMatrix operator-(DenseMatrix m);
DenseMatrix operator*(const DenseMatrix& lhs, const DenseMatrix& rhs);
DenseMatrix operator*(double scalar, DenseMatrix m);
DenseMatrix operator*(DenseMatrix m, double scalar);

/// Max absolute entrywise difference; dimensions must agree.
double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b);

/// Solves a x = b by LU with partial pivoting after row and column equilibration.
/// Throws Error(Singular) when a pivot falls below 1e-14 * ||a||_inf of the
/// equilibrated matrix.
DenseMatrix lu_solve(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix inverse(const DenseMatrix& a);
/// ||a||_inf * ||a^-1||_inf.
double condition_inf(const DenseMatrix& a);

enum class Triangle { upper, lower };

bool is_triangular(const DenseMatrix& m, Triangle orientation, double tol = 0.0);

/// Inverse by substitution; the result is exactly triangular.
DenseMatrix triangular_inverse(const DenseMatrix& t, Triangle orientation);

/// Diagonalization with left eigenvectors as rows:
///   left_vectors * A = diag(values) * left_vectors,
///   A = inverse_vectors * diag(values) * left_vectors.
struct EigenSystem {
  std::vector<double> values;
  DenseMatrix left_vectors;
  DenseMatrix inverse_vectors;
  /// Infinity-norm condition number of left_vectors.
  double condition = 1.0;

  std::size_t size() const noexcept { return values.size(); }

  static EigenSystem from_left_vectors(std::vector<double> values, DenseMatrix left_vectors);
  /// Rebuilds the matrix this system diagonalizes.
  DenseMatrix reconstruct() const;
};

/// Eigen-decomposition of a triangular matrix with pairwise-distinct diagonal
/// (relative gap > 1e-9). Rows of left_vectors are normalized so the pivot
/// entry (position i for eigenvalue t(i,i)) equals 1.
/// Throws Error(RepeatedDiagonal).
EigenSystem tri_eigen(const DenseMatrix& t, Triangle orientation);

/// inverse_vectors * diag(f(values)) * left_vectors.
template <typename Fn>
DenseMatrix mat_func(const EigenSystem& es, Fn&& f) {
  const std::size_t n = es.size();
  DenseMatrix scaled = es.left_vectors;
  for (std::size_t i = 0; i < n; ++i) {
    const double fi = f(es.values[i]);
    for (double& v : scaled.row_span(i)) v *= fi;
  }
  return es.inverse_vectors * scaled;
}

/// e^a by scaling and squaring with a Pade approximant. Triangular input is
/// first graded by a power-of-two diagonal similarity so that large
/// off-diagonal entries do not force extra squarings.
DenseMatrix expm(const DenseMatrix& a);

/// Eigenvector matrices above this condition make matrix functions fall back
/// to direct evaluation on the matrix itself. Graded triangular matrices often
/// have condition 1e6..1e8 yet stay componentwise accurate on the eigen path,
/// which the normwise Pade result is not.
inline constexpr double kDirectEvaluation = 1e10;

/// e^{A x} where es diagonalizes A; uses expm(x A) when es is ill-conditioned.
DenseMatrix exp_times(const DenseMatrix& a, const EigenSystem& es, double x);

/// Scalar kernel g(theta) = int_a^b theta x e^{theta x} dx. b may be +inf when theta < 0.
double i_kernel_scalar(double theta, double a, double b);

/// I(a,b;D) = int_a^b D x e^{Dx} dx, applied through the spectrum of D.
/// b = +infinity requires a strictly negative spectrum (Error(DivergentIntegral)).
DenseMatrix i_kernel(double a, double b, const EigenSystem& es);

/// Same kernel for finite b; evaluated through an augmented exponential when es is
/// ill-conditioned.
DenseMatrix i_kernel(double a, double b, const DenseMatrix& d, const EigenSystem& es);

}  // namespace vqt
