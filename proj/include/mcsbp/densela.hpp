#ifndef MCSBP_DENSELA_HPP
#define MCSBP_DENSELA_HPP

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace mcsbp::densela {

/// Dense real matrix, row-major storage.  Sized for operator work up to a
/// few thousand rows; no sparse formats, no complex entries.
class Matrix {
public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::initializer_list<double> entries);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> entries);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }
  const double* row_ptr(std::size_t i) const { return data_.data() + i * cols_; }
  double* row_ptr(std::size_t i) { return data_.data() + i * cols_; }

  Matrix transposed() const;
  double max_abs() const;
  double frobenius_norm() const;

  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);
  Matrix& operator*=(double s);

  /// Scale row i by s[i] (left-multiplication by a diagonal matrix).
  Matrix& scale_rows(std::span<const double> s);
  /// Scale column j by s[j] (right-multiplication by a diagonal matrix).
  Matrix& scale_cols(std::span<const double> s);

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(Matrix a, double s);
Matrix operator*(double s, Matrix a);
Matrix operator*(const Matrix& a, const Matrix& b);

/// y = A x
std::vector<double> matvec(const Matrix& a, std::span<const double> x);
/// y = A^T x
std::vector<double> matvec_transposed(const Matrix& a, std::span<const double> x);
/// A^T B without forming A^T.
Matrix multiply_at_b(const Matrix& a, const Matrix& b);

using ComplexList = std::vector<std::complex<double>>;

/// Lower-triangular Cholesky factor L with L L^T = m.  The input must be
/// symmetric within 1e-12 * max|m| and positive definite; a non-positive
/// pivot raises std::runtime_error naming the pivot index.
Matrix cholesky(const Matrix& m);

/// Minimum-Frobenius-norm solution of min ||A X - B||_F, computed by a
/// complete orthogonal decomposition (column-pivoted QR + orthogonal
/// completion).  Rank tolerance 1e-12 * max |R_kk|.
Matrix minnorm_solve(const Matrix& a, const Matrix& b);

/// All eigenvalues of a real square matrix: Hessenberg reduction followed by
/// the implicitly shifted (Francis double-shift) QR iteration with a real
/// Schur 2x2-block back-end.  Iteration cap 100*n; on non-convergence raises
/// std::runtime_error reporting the stalled subdiagonal index.
ComplexList eig_general(const Matrix& a);

/// W-orthonormal complement of V: Z with V^T W Z = 0, Z^T W Z = I, where W is
/// the diagonal with the given positive entries and V^T W V = I on entry.
/// Returns an N x 0 matrix when V is square.
Matrix w_orthonormal_complement(const Matrix& v, std::span<const double> w);

/// Largest eigenvalue of the symmetric part (A + A^T)/2.
double max_symmetric_eig(const Matrix& a);

/// Numerical rank via column-pivoted QR: count of |R_kk| > tol * |R_00|.
std::size_t rank_estimate(const Matrix& a, double rel_tol = 1e-10);

}  // namespace mcsbp::densela

#endif  // MCSBP_DENSELA_HPP
