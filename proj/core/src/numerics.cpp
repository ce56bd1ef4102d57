#include "vqt/numerics.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "vqt/error.hpp"

namespace vqt {

namespace {

void require_same_shape(const DenseMatrix& a, const DenseMatrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorKind::InvalidArgument,
                std::string("shape mismatch in ") + op + ": " + std::to_string(a.rows()) + "x" +
                    std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                    std::to_string(b.cols()));
  }
}

constexpr double kPivotTolerance = 1e-14;
constexpr double kDiagonalGap = 1e-9;

}  // namespace

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), entries_(rows * cols, fill) {}

DenseMatrix::DenseMatrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() == 0 ? 0 : rows.begin()->size()) {
  entries_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw Error(ErrorKind::InvalidArgument, "ragged matrix literal");
    entries_.insert(entries_.end(), r.begin(), r.end());
  }
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::diagonal(std::span<const double> values) {
  DenseMatrix m(values.size(), values.size());
  for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
  return m;
}

DenseMatrix DenseMatrix::row_vector(std::span<const double> values) {
  DenseMatrix m(1, values.size());
  std::copy(values.begin(), values.end(), m.entries_.begin());
  return m;
}

DenseMatrix DenseMatrix::column_vector(std::span<const double> values) {
  DenseMatrix m(values.size(), 1);
  std::copy(values.begin(), values.end(), m.entries_.begin());
  return m;
}

std::vector<double> DenseMatrix::row(std::size_t i) const {
  const auto r = row_span(i);
  return {r.begin(), r.end()};
}

DenseMatrix DenseMatrix::transpose() const {
  DenseMatrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

std::vector<double> DenseMatrix::diagonal_entries() const {
  const std::size_t n = std::min(rows_, cols_);
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = (*this)(i, i);
  return d;
}

double DenseMatrix::norm_inf() const {
  double best = 0.0;
  for (std::size_t i = 0; i < rows_; ++i) {
    double s = 0.0;
    for (double v : row_span(i)) s += std::abs(v);
    best = std::max(best, s);
  }
  return best;
}

double DenseMatrix::max_abs() const {
  double best = 0.0;
  for (double v : entries_) best = std::max(best, std::abs(v));
  return best;
}

double DenseMatrix::sum() const {
  double s = 0.0;
  for (double v : entries_) s += v;
  return s;
}

DenseMatrix& DenseMatrix::operator+=(const DenseMatrix& other) {
  require_same_shape(*this, other, "+");
  for (std::size_t i = 0; i < entries_.size(); ++i) entries_[i] += other.entries_[i];
  return *this;
}

DenseMatrix& DenseMatrix::operator-=(const DenseMatrix& other) {
  require_same_shape(*this, other, "-");
  for (std::size_t i = 0; i < entries_.size(); ++i) entries_[i] -= other.entries_[i];
  return *this;
}

DenseMatrix& DenseMatrix::operator*=(double scalar) {
  for (double& v : entries_) v *= scalar;
  return *this;
}

DenseMatrix operator+(DenseMatrix lhs, const DenseMatrix& rhs) { return lhs += rhs; }
DenseMatrix operator-(DenseMatrix lhs, const DenseMatrix& rhs) { return lhs -= rhs; }
DenseMatrix operator-(DenseMatrix m) { return m *= -1.0; }
DenseMatrix operator*(double scalar, DenseMatrix m) { return m *= scalar; }
DenseMatrix operator*(DenseMatrix m, double scalar) { return m *= scalar; }

DenseMatrix operator*(const DenseMatrix& lhs, const DenseMatrix& rhs) {
  if (lhs.cols() != rhs.rows()) {
    throw Error(ErrorKind::InvalidArgument,
                "inner dimension mismatch: " + std::to_string(lhs.cols()) + " vs " +
                    std::to_string(rhs.rows()));
  }
  DenseMatrix out(lhs.rows(), rhs.cols());
  for (std::size_t i = 0; i < lhs.rows(); ++i) {
    auto dst = out.row_span(i);
    for (std::size_t p = 0; p < lhs.cols(); ++p) {
      const double a = lhs(i, p);
      if (a == 0.0) continue;
      const auto src = rhs.row_span(p);
      for (std::size_t j = 0; j < rhs.cols(); ++j) dst[j] += a * src[j];
    }
  }
  return out;
}

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
  require_same_shape(a, b, "max_abs_diff");
  double best = 0.0;
  const auto ea = a.entries();
  const auto eb = b.entries();
  for (std::size_t i = 0; i < ea.size(); ++i) best = std::max(best, std::abs(ea[i] - eb[i]));
  return best;
}

DenseMatrix lu_solve(const DenseMatrix& a, const DenseMatrix& b) {
  if (!a.is_square()) throw Error(ErrorKind::InvalidArgument, "lu_solve: matrix is not square");
  if (b.rows() != a.rows()) throw Error(ErrorKind::InvalidArgument, "lu_solve: rhs row mismatch");

  const std::size_t n = a.rows();
  const std::size_t m = b.cols();
  DenseMatrix lu = a;
  DenseMatrix x = b;

  // Row then column equilibration: solve (R A C) y = R b, x = C y.
  for (std::size_t i = 0; i < n; ++i) {
    double big = 0.0;
    for (double v : lu.row_span(i)) big = std::max(big, std::abs(v));
    if (!(big > 0.0) || !std::isfinite(big)) {
      throw Error(ErrorKind::Singular, "row " + std::to_string(i) + " is zero or not finite");
    }
    for (double& v : lu.row_span(i)) v /= big;
    for (double& v : x.row_span(i)) v /= big;
  }
  std::vector<double> col_scale(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) col_scale[j] = std::max(col_scale[j], std::abs(lu(i, j)));
  for (std::size_t j = 0; j < n; ++j) {
    if (!(col_scale[j] > 0.0)) throw Error(ErrorKind::Singular, "column " + std::to_string(j) + " is zero");
    for (std::size_t i = 0; i < n; ++i) lu(i, j) /= col_scale[j];
  }
  const double guard = kPivotTolerance * lu.norm_inf();

  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(lu(r, col)) > std::abs(lu(pivot, col))) pivot = r;
    if (!(std::abs(lu(pivot, col)) > guard)) {
      throw Error(ErrorKind::Singular, "pivot " + std::to_string(col) + " below tolerance");
    }
    if (pivot != col) {
      std::swap_ranges(lu.row_span(col).begin(), lu.row_span(col).end(),
                       lu.row_span(pivot).begin());
      std::swap_ranges(x.row_span(col).begin(), x.row_span(col).end(),
                       x.row_span(pivot).begin());
    }
    const double diag = lu(col, col);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double factor = lu(r, col) / diag;
      if (factor == 0.0) continue;
      for (std::size_t j = col; j < n; ++j) lu(r, j) -= factor * lu(col, j);
      for (std::size_t j = 0; j < m; ++j) x(r, j) -= factor * x(col, j);
    }
  }
  for (std::size_t ii = n; ii-- > 0;) {
    for (std::size_t j = 0; j < m; ++j) {
      double s = x(ii, j);
      for (std::size_t p = ii + 1; p < n; ++p) s -= lu(ii, p) * x(p, j);
      x(ii, j) = s / lu(ii, ii);
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (double& v : x.row_span(i)) v /= col_scale[i];
  return x;
}

DenseMatrix inverse(const DenseMatrix& a) { return lu_solve(a, DenseMatrix::identity(a.rows())); }

double condition_inf(const DenseMatrix& a) { return a.norm_inf() * inverse(a).norm_inf(); }

bool is_triangular(const DenseMatrix& m, Triangle orientation, double tol) {
  if (!m.is_square()) return false;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) {
      const bool outside = orientation == Triangle::upper ? j < i : j > i;
      if (outside && std::abs(m(i, j)) > tol) return false;
    }
  return true;
}

DenseMatrix triangular_inverse(const DenseMatrix& t, Triangle orientation) {
  if (!is_triangular(t, orientation)) {
    throw Error(ErrorKind::InvalidArgument, "triangular_inverse: matrix is not triangular");
  }
  const std::size_t n = t.rows();
  double diag_scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) diag_scale = std::max(diag_scale, std::abs(t(i, i)));
  const double guard = kPivotTolerance * diag_scale;
  for (std::size_t i = 0; i < n; ++i)
    if (!(std::abs(t(i, i)) > guard))
      throw Error(ErrorKind::Singular, "zero diagonal entry " + std::to_string(i));

  // Column j of the inverse solves t x = e_j.
  DenseMatrix inv(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    if (orientation == Triangle::upper) {
      for (std::size_t ii = j + 1; ii-- > 0;) {
        double s = ii == j ? 1.0 : 0.0;
        for (std::size_t p = ii + 1; p <= j; ++p) s -= t(ii, p) * inv(p, j);
        inv(ii, j) = s / t(ii, ii);
      }
    } else {
      for (std::size_t ii = j; ii < n; ++ii) {
        double s = ii == j ? 1.0 : 0.0;
        for (std::size_t p = j; p < ii; ++p) s -= t(ii, p) * inv(p, j);
        inv(ii, j) = s / t(ii, ii);
      }
    }
  }
  return inv;
}

EigenSystem EigenSystem::from_left_vectors(std::vector<double> values, DenseMatrix left_vectors) {
  EigenSystem es;
  es.values = std::move(values);
  if (is_triangular(left_vectors, Triangle::upper)) {
    es.inverse_vectors = triangular_inverse(left_vectors, Triangle::upper);
  } else if (is_triangular(left_vectors, Triangle::lower)) {
    es.inverse_vectors = triangular_inverse(left_vectors, Triangle::lower);
  } else {
    es.inverse_vectors = inverse(left_vectors);
  }
  es.condition = left_vectors.norm_inf() * es.inverse_vectors.norm_inf();
  es.left_vectors = std::move(left_vectors);
  return es;
}

DenseMatrix EigenSystem::reconstruct() const {
  return mat_func(*this, [](double v) { return v; });
}

EigenSystem tri_eigen(const DenseMatrix& t, Triangle orientation) {
  if (!t.is_square()) throw Error(ErrorKind::InvalidArgument, "tri_eigen: matrix is not square");
  const std::size_t n = t.rows();
  std::vector<double> values = t.diagonal_entries();

  double scale = 0.0;
  for (double v : values) scale = std::max(scale, std::abs(v));
  scale = std::max(scale, std::numeric_limits<double>::min());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(values[i] - values[j]) <= kDiagonalGap * scale) {
        throw Error(ErrorKind::RepeatedDiagonal,
                    "diagonal entries " + std::to_string(i) + " and " + std::to_string(j) +
                        " coincide");
      }

  // v (T - value_i I) = 0 column by column, starting at the pivot.
  DenseMatrix left(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    auto v = left.row_span(i);
    v[i] = 1.0;
    if (orientation == Triangle::upper) {
      for (std::size_t j = i + 1; j < n; ++j) {
        double s = 0.0;
        for (std::size_t p = i; p < j; ++p) s += v[p] * t(p, j);
        v[j] = -s / (t(j, j) - values[i]);
      }
    } else {
      for (std::size_t j = i; j-- > 0;) {
        double s = 0.0;
        for (std::size_t p = j + 1; p <= i; ++p) s += v[p] * t(p, j);
        v[j] = -s / (t(j, j) - values[i]);
      }
    }
  }
  return EigenSystem::from_left_vectors(std::move(values), std::move(left));
}

namespace {

// h(x) = x e^{theta x} - (e^{theta x} - 1) / theta, so h' = theta x e^{theta x} and h(0) = 0.
double antiderivative(double theta, double x) {
  const double t = theta * x;
  if (std::abs(t) < 1.0) {
    // sum_{n>=1} n t^n / (n+1)!, times x.
    double term = 1.0;
    double total = 0.0;
    for (int n = 1; n < 40; ++n) {
      term *= t / (n + 1);
      total += n * term;
      if (std::abs(term) < 1e-18 * std::abs(total)) break;
    }
    return x * total;
  }
  return x * std::exp(t) - std::expm1(t) / theta;
}

}  // namespace

double i_kernel_scalar(double theta, double a, double b) {
  assert(a >= 0.0 && b >= a);
  if (std::isinf(b)) {
    if (!(theta < 0.0)) {
      throw Error(ErrorKind::DivergentIntegral,
                  "infinite upper limit with nonnegative eigenvalue " + std::to_string(theta));
    }
    const double ea = std::exp(theta * a);
    return -a * ea + ea / theta;
  }
  return antiderivative(theta, b) - antiderivative(theta, a);
}

DenseMatrix i_kernel(double a, double b, const EigenSystem& es) {
  return mat_func(es, [a, b](double theta) { return i_kernel_scalar(theta, a, b); });
}

namespace {

Eigen::MatrixXd to_eigen(const DenseMatrix& m) {
  Eigen::MatrixXd out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(i, j);
  return out;
}

DenseMatrix from_eigen(const Eigen::MatrixXd& m, std::size_t row0, std::size_t col0,
                       std::size_t rows, std::size_t cols) {
  DenseMatrix out(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      out(i, j) = m(static_cast<Eigen::Index>(row0 + i), static_cast<Eigen::Index>(col0 + j));
  return out;
}

// int_0^t s D e^{Ds} ds from the exponential of [[D, I, 0], [0, 0, I], [0, 0, 0]] t, whose
// top blocks are e^{Dt}, int_0^t e^{Ds} ds and int_0^t (t - s) e^{Ds} ds.
DenseMatrix i_kernel_direct(double t, const DenseMatrix& d) {
  const std::size_t n = d.rows();
  if (t == 0.0) return DenseMatrix(n, n);
  const auto en = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd block = Eigen::MatrixXd::Zero(3 * en, 3 * en);
  block.topLeftCorner(en, en) = to_eigen(d) * t;
  block.block(0, en, en, en) = Eigen::MatrixXd::Identity(en, en) * t;
  block.block(en, 2 * en, en, en) = Eigen::MatrixXd::Identity(en, en) * t;
  const Eigen::MatrixXd e = block.exp();
  const DenseMatrix e12 = from_eigen(e, 0, n, n, n);
  const DenseMatrix e13 = from_eigen(e, 0, 2 * n, n, n);
  return d * (t * e12 - e13);
}

// Power-of-two diagonal s with |(s^-1 L s)(i,j)| <= max |L(i,i)| for lower triangular L.
Eigen::VectorXd grading_scaling(const Eigen::MatrixXd& l) {
  const Eigen::Index n = l.rows();
  const double scale = std::max(l.diagonal().cwiseAbs().maxCoeff(), 1.0);
  Eigen::VectorXd s = Eigen::VectorXd::Ones(n);
  for (Eigen::Index i = 1; i < n; ++i) {
    double need = 1.0;
    for (Eigen::Index j = 0; j < i; ++j) need = std::max(need, std::abs(l(i, j)) * s(j) / scale);
    s(i) = std::exp2(std::ceil(std::log2(need)));
  }
  return s;
}

Eigen::MatrixXd graded_exp(const Eigen::MatrixXd& l) {
  const Eigen::VectorXd s = grading_scaling(l);
  const Eigen::MatrixXd graded = s.cwiseInverse().asDiagonal() * l * s.asDiagonal();
  return s.asDiagonal() * graded.exp() * s.cwiseInverse().asDiagonal();
}

}  // namespace

DenseMatrix expm(const DenseMatrix& a) {
  if (!a.is_square()) throw Error(ErrorKind::InvalidArgument, "expm: matrix is not square");
  const Eigen::MatrixXd m = to_eigen(a);
  Eigen::MatrixXd e;
  if (is_triangular(a, Triangle::lower)) {
    e = graded_exp(m);
  } else if (is_triangular(a, Triangle::upper)) {
    e = graded_exp(m.transpose()).transpose();
  } else {
    e = m.exp();
  }
  return from_eigen(e, 0, 0, a.rows(), a.cols());
}

DenseMatrix exp_times(const DenseMatrix& a, const EigenSystem& es, double x) {
  if (es.condition <= kDirectEvaluation) {
    return mat_func(es, [x](double v) { return std::exp(v * x); });
  }
  return expm(x * a);
}

DenseMatrix i_kernel(double a, double b, const DenseMatrix& d, const EigenSystem& es) {
  if (es.condition <= kDirectEvaluation || std::isinf(b)) return i_kernel(a, b, es);
  return i_kernel_direct(b, d) - i_kernel_direct(a, d);
}

}  // namespace vqt
