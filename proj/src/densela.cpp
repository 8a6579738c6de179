#include "mcsbp/densela.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace mcsbp::densela {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

void require(bool cond, const char* what) {
  if (!cond) throw std::invalid_argument(what);
}

/// Householder reflector for x (length >= 1): computes tau and beta so that
/// (I - tau v v^T) x = beta e_1 with v = [1, x_rest / (x_0 - beta)].
/// On return x[0] = beta and x[1..] holds the reflector tail v[1..].
double make_reflector(std::span<double> x) {
  const std::size_t m = x.size();
  if (m == 0) return 0.0;
  double xnorm2 = 0.0;
  for (std::size_t i = 1; i < m; ++i) xnorm2 += x[i] * x[i];
  const double alpha = x[0];
  if (xnorm2 == 0.0) return 0.0;  // already e_1 direction (beta = alpha, H = I)
  const double beta = -std::copysign(std::sqrt(alpha * alpha + xnorm2), alpha);
  const double tau = (beta - alpha) / beta;
  const double inv = 1.0 / (alpha - beta);
  for (std::size_t i = 1; i < m; ++i) x[i] *= inv;
  x[0] = beta;
  return tau;
}

/// Apply H = I - tau v v^T (v[0] = 1, tail in vtail) to rows [row0, row0+len)
/// of the column range [col0, col1) of a.
void apply_reflector_left(Matrix& a, std::size_t row0, std::size_t len,
                          std::span<const double> vtail, double tau,
                          std::size_t col0, std::size_t col1) {
  if (tau == 0.0) return;
  for (std::size_t j = col0; j < col1; ++j) {
    double s = a(row0, j);
    for (std::size_t i = 1; i < len; ++i) s += vtail[i - 1] * a(row0 + i, j);
    s *= tau;
    a(row0, j) -= s;
    for (std::size_t i = 1; i < len; ++i) a(row0 + i, j) -= s * vtail[i - 1];
  }
}

/// Apply H = I - tau v v^T from the right to columns [col0, col0+len) of the
/// row range [row0, row1) of a.
void apply_reflector_right(Matrix& a, std::size_t col0, std::size_t len,
                           std::span<const double> vtail, double tau,
                           std::size_t row0, std::size_t row1) {
  if (tau == 0.0) return;
  for (std::size_t i = row0; i < row1; ++i) {
    double s = a(i, col0);
    for (std::size_t j = 1; j < len; ++j) s += a(i, col0 + j) * vtail[j - 1];
    s *= tau;
    a(i, col0) -= s;
    for (std::size_t j = 1; j < len; ++j) a(i, col0 + j) -= s * vtail[j - 1];
  }
}

struct Cpqr {
  Matrix r;                      // factors; reflector tails below the diagonal
  std::vector<double> tau;
  std::vector<std::size_t> jpvt;  // column k of the pivoted matrix is column jpvt[k] of a
  std::size_t rank = 0;
};

/// Column-pivoted Householder QR with a relative rank tolerance on the
/// diagonal of R.
Cpqr cpqr_factor(const Matrix& a, double rel_tol) {
  const std::size_t n = a.rows(), m = a.cols();
  Cpqr f;
  f.r = a;
  f.jpvt.resize(m);
  for (std::size_t j = 0; j < m; ++j) f.jpvt[j] = j;
  const std::size_t kmax = std::min(n, m);
  f.tau.assign(kmax, 0.0);

  std::vector<double> cn(m, 0.0), cn_ref(m, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += f.r(i, j) * f.r(i, j);
    cn[j] = cn_ref[j] = s;
  }

  std::vector<double> col(n);
  for (std::size_t k = 0; k < kmax; ++k) {
    std::size_t piv = k;
    for (std::size_t j = k + 1; j < m; ++j)
      if (cn[j] > cn[piv]) piv = j;
    if (piv != k) {
      for (std::size_t i = 0; i < n; ++i) std::swap(f.r(i, k), f.r(i, piv));
      std::swap(f.jpvt[k], f.jpvt[piv]);
      std::swap(cn[k], cn[piv]);
      std::swap(cn_ref[k], cn_ref[piv]);
    }
    for (std::size_t i = k; i < n; ++i) col[i - k] = f.r(i, k);
    f.tau[k] = make_reflector(std::span<double>(col.data(), n - k));
    for (std::size_t i = k; i < n; ++i) f.r(i, k) = col[i - k];
    apply_reflector_left(f.r, k, n - k, std::span<const double>(col.data() + 1, n - k - 1),
                         f.tau[k], k + 1, m);
    // downdate remaining column norms; recompute when cancellation degrades them
    for (std::size_t j = k + 1; j < m; ++j) {
      cn[j] -= f.r(k, j) * f.r(k, j);
      if (cn[j] < 1e-2 * kEps * cn_ref[j] || cn[j] < 0.0) {
        double s = 0.0;
        for (std::size_t i = k + 1; i < n; ++i) s += f.r(i, j) * f.r(i, j);
        cn[j] = cn_ref[j] = s;
      }
    }
  }

  const double r00 = kmax > 0 ? std::fabs(f.r(0, 0)) : 0.0;
  const double thresh = rel_tol * r00;
  std::size_t rank = 0;
  while (rank < kmax && std::fabs(f.r(rank, rank)) > thresh && r00 > 0.0) ++rank;
  f.rank = rank;
  return f;
}

/// Apply Q^T from a CPQR factorization to b in place.
void cpqr_apply_qt(const Cpqr& f, Matrix& b) {
  const std::size_t n = f.r.rows();
  std::vector<double> vtail(n);
  for (std::size_t k = 0; k < f.tau.size(); ++k) {
    if (f.tau[k] == 0.0) continue;
    const std::size_t len = n - k;
    for (std::size_t i = 1; i < len; ++i) vtail[i - 1] = f.r(k + i, k);
    apply_reflector_left(b, k, len, std::span<const double>(vtail.data(), len - 1),
                         f.tau[k], 0, b.cols());
  }
}

void check_square(const Matrix& a, const char* who) {
  if (a.rows() != a.cols())
    throw std::invalid_argument(std::string(who) + ": matrix must be square");
}

/// Eigenvalues of a real 2x2 block.
void eig_2x2(double a, double b, double c, double d, std::complex<double>& l1,
             std::complex<double>& l2) {
  const double p = 0.5 * (a + d);
  const double disc = 0.25 * (a - d) * (a - d) + b * c;
  if (disc >= 0.0) {
    const double sq = std::sqrt(disc);
    const double big = p + std::copysign(sq, p);
    l1 = std::complex<double>(big, 0.0);
    // the smaller root via the product to avoid cancellation
    const double det = a * d - b * c;
    l2 = std::complex<double>(big != 0.0 ? det / big : p - std::copysign(sq, p), 0.0);
  } else {
    const double sq = std::sqrt(-disc);
    l1 = std::complex<double>(p, sq);
    l2 = std::complex<double>(p, -sq);
  }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, std::initializer_list<double> entries)
    : rows_(rows), cols_(cols), data_(entries) {
  require(data_.size() == rows * cols, "Matrix: initializer size mismatch");
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> entries) {
  Matrix m(entries.size(), entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) m(i, i) = entries[i];
  return m;
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

double Matrix::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::fabs(v));
  return m;
}

double Matrix::frobenius_norm() const {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return std::sqrt(s);
}

Matrix& Matrix::operator+=(const Matrix& other) {
  require(rows_ == other.rows_ && cols_ == other.cols_, "Matrix +=: shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
  require(rows_ == other.rows_ && cols_ == other.cols_, "Matrix -=: shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Matrix& Matrix::scale_rows(std::span<const double> s) {
  require(s.size() == rows_, "scale_rows: size mismatch");
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) (*this)(i, j) *= s[i];
  return *this;
}

Matrix& Matrix::scale_cols(std::span<const double> s) {
  require(s.size() == cols_, "scale_cols: size mismatch");
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) (*this)(i, j) *= s[j];
  return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(Matrix a, double s) { return a *= s; }
Matrix operator*(double s, Matrix a) { return a *= s; }

Matrix operator*(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.rows(), "Matrix *: shape mismatch");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* ci = c.row_ptr(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      const double* bk = b.row_ptr(k);
      for (std::size_t j = 0; j < b.cols(); ++j) ci[j] += aik * bk[j];
    }
  }
  return c;
}

std::vector<double> matvec(const Matrix& a, std::span<const double> x) {
  require(a.cols() == x.size(), "matvec: size mismatch");
  std::vector<double> y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* ai = a.row_ptr(i);
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += ai[j] * x[j];
    y[i] = s;
  }
  return y;
}

std::vector<double> matvec_transposed(const Matrix& a, std::span<const double> x) {
  require(a.rows() == x.size(), "matvec_transposed: size mismatch");
  std::vector<double> y(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* ai = a.row_ptr(i);
    const double xi = x[i];
    if (xi == 0.0) continue;
    for (std::size_t j = 0; j < a.cols(); ++j) y[j] += ai[j] * xi;
  }
  return y;
}

Matrix multiply_at_b(const Matrix& a, const Matrix& b) {
  require(a.rows() == b.rows(), "multiply_at_b: shape mismatch");
  Matrix c(a.cols(), b.cols());
  for (std::size_t k = 0; k < a.rows(); ++k) {
    const double* ak = a.row_ptr(k);
    const double* bk = b.row_ptr(k);
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double aki = ak[i];
      if (aki == 0.0) continue;
      double* ci = c.row_ptr(i);
      for (std::size_t j = 0; j < b.cols(); ++j) ci[j] += aki * bk[j];
    }
  }
  return c;
}

Matrix cholesky(const Matrix& m) {
  check_square(m, "cholesky");
  const std::size_t n = m.rows();
  const double scale = m.max_abs();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::fabs(m(i, j) - m(j, i)) > 1e-12 * std::max(1.0, scale))
        throw std::invalid_argument("cholesky: matrix is not symmetric");

  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = m(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (d <= 0.0)
      throw std::runtime_error("cholesky: not positive definite (pivot " +
                               std::to_string(j) + ")");
    l(j, j) = std::sqrt(d);
    const double inv = 1.0 / l(j, j);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = m(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s * inv;
    }
  }
  return l;
}

Matrix minnorm_solve(const Matrix& a, const Matrix& b) {
  require(a.rows() == b.rows(), "minnorm_solve: row mismatch");
  const std::size_t m = a.cols(), p = b.cols();
  const Cpqr f = cpqr_factor(a, 1e-12);
  Matrix x(m, p);
  if (f.rank == 0) return x;
  const std::size_t r = f.rank;

  Matrix qtb = b;
  cpqr_apply_qt(f, qtb);

  // orthogonal completion: QR of [R11 R12]^T compresses the leading r rows of
  // R to [T 0] Z^T with T = R_y^T held transposed in y's upper triangle
  Matrix y(m, r);
  for (std::size_t k = 0; k < r; ++k)
    for (std::size_t j = k; j < m; ++j) y(j, k) = f.r(k, j);
  std::vector<double> ztau(r, 0.0);
  {
    std::vector<double> col(m);
    for (std::size_t k = 0; k < r; ++k) {
      for (std::size_t i = k; i < m; ++i) col[i - k] = y(i, k);
      ztau[k] = make_reflector(std::span<double>(col.data(), m - k));
      for (std::size_t i = k; i < m; ++i) y(i, k) = col[i - k];
      apply_reflector_left(y, k, m - k, std::span<const double>(col.data() + 1, m - k - 1),
                           ztau[k], k + 1, r);
    }
  }

  // forward substitution on T = (leading r x r of y)^T, lower triangular:
  // T(i,k) = y(k,i) lives in the upper triangle of the factored y
  Matrix sol(m, p);
  for (std::size_t c = 0; c < p; ++c) {
    for (std::size_t i = 0; i < r; ++i) {
      double s = qtb(i, c);
      for (std::size_t k = 0; k < i; ++k) s -= y(k, i) * sol(k, c);
      sol(i, c) = s / y(i, i);
    }
  }

  // x_hat = Z * [sol; 0]: apply reflectors in reverse order
  {
    std::vector<double> vtail(m);
    for (std::size_t kk = r; kk-- > 0;) {
      if (ztau[kk] == 0.0) continue;
      const std::size_t len = m - kk;
      for (std::size_t i = 1; i < len; ++i) vtail[i - 1] = y(kk + i, kk);
      apply_reflector_left(sol, kk, len, std::span<const double>(vtail.data(), len - 1),
                           ztau[kk], 0, p);
    }
  }

  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t c = 0; c < p; ++c) x(f.jpvt[i], c) = sol(i, c);
  return x;
}

std::size_t rank_estimate(const Matrix& a, double rel_tol) {
  if (a.rows() == 0 || a.cols() == 0) return 0;
  return cpqr_factor(a, rel_tol).rank;
}

ComplexList eig_general(const Matrix& a) {
  check_square(a, "eig_general");
  const std::size_t n = a.rows();
  ComplexList eigs;
  eigs.reserve(n);
  if (n == 0) return eigs;
  if (n == 1) {
    eigs.emplace_back(a(0, 0), 0.0);
    return eigs;
  }

  Matrix h = a;
  // Hessenberg reduction
  {
    std::vector<double> col(n);
    for (std::size_t k = 0; k + 2 < n; ++k) {
      const std::size_t len = n - k - 1;
      for (std::size_t i = 0; i < len; ++i) col[i] = h(k + 1 + i, k);
      const double tau = make_reflector(std::span<double>(col.data(), len));
      std::span<const double> vtail(col.data() + 1, len - 1);
      h(k + 1, k) = col[0];
      for (std::size_t i = k + 2; i < n; ++i) h(i, k) = 0.0;
      apply_reflector_left(h, k + 1, len, vtail, tau, k + 1, n);
      apply_reflector_right(h, k + 1, len, vtail, tau, 0, n);
    }
  }

  double hnorm = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = (i == 0 ? 0 : i - 1); j < n; ++j) hnorm += std::fabs(h(i, j));
  if (hnorm == 0.0) hnorm = 1.0;

  const std::size_t iter_cap = 100 * n;
  std::size_t total_its = 0;
  std::size_t window_its = 0;
  std::ptrdiff_t ihi = static_cast<std::ptrdiff_t>(n) - 1;

  while (ihi >= 0) {
    // deflation scan from the bottom of the active window
    std::ptrdiff_t ilo = ihi;
    while (ilo > 0) {
      double s = std::fabs(h(ilo - 1, ilo - 1)) + std::fabs(h(ilo, ilo));
      if (s == 0.0) s = hnorm;
      if (std::fabs(h(ilo, ilo - 1)) <= kEps * s) {
        h(ilo, ilo - 1) = 0.0;
        break;
      }
      --ilo;
    }

    if (ilo == ihi) {
      eigs.emplace_back(h(ihi, ihi), 0.0);
      --ihi;
      window_its = 0;
      continue;
    }
    if (ilo == ihi - 1) {
      std::complex<double> l1, l2;
      eig_2x2(h(ihi - 1, ihi - 1), h(ihi - 1, ihi), h(ihi, ihi - 1), h(ihi, ihi), l1, l2);
      eigs.push_back(l1);
      eigs.push_back(l2);
      ihi -= 2;
      window_its = 0;
      continue;
    }

    if (++total_its > iter_cap)
      throw std::runtime_error("eig_general: QR iteration stalled at subdiagonal index " +
                               std::to_string(ihi));
    ++window_its;

    // Francis double shift from the trailing 2x2; exceptional shifts on stall
    double s, t;
    if (window_its % 10 == 0) {
      const double sd = std::fabs(h(ihi, ihi - 1)) + std::fabs(h(ihi - 1, ihi - 2));
      const double s1 = h(ihi, ihi) + 0.75 * sd;
      s = 2.0 * s1;
      t = s1 * s1;
    } else {
      s = h(ihi - 1, ihi - 1) + h(ihi, ihi);
      t = h(ihi - 1, ihi - 1) * h(ihi, ihi) - h(ihi - 1, ihi) * h(ihi, ihi - 1);
    }

    double x = h(ilo, ilo) * h(ilo, ilo) + h(ilo, ilo + 1) * h(ilo + 1, ilo) -
               s * h(ilo, ilo) + t;
    double y = h(ilo + 1, ilo) * (h(ilo, ilo) + h(ilo + 1, ilo + 1) - s);
    double z = h(ilo + 1, ilo) * h(ilo + 2, ilo + 1);

    for (std::ptrdiff_t k = ilo; k <= ihi - 2; ++k) {
      double v[3] = {x, y, z};
      const std::size_t len = 3;
      const double tau = make_reflector(std::span<double>(v, len));
      std::span<const double> vtail(v + 1, len - 1);
      if (k > ilo) {
        h(k, k - 1) = v[0];  // beta: the chased bulge column collapses to e_1
        h(k + 1, k - 1) = 0.0;
        h(k + 2, k - 1) = 0.0;
      }
      apply_reflector_left(h, k, len, vtail, tau, k, ihi + 1);
      const std::ptrdiff_t rlo = ilo, rhi = std::min<std::ptrdiff_t>(k + 3, ihi) + 1;
      apply_reflector_right(h, k, len, vtail, tau, rlo, rhi);

      if (k < ihi - 2) {
        x = h(k + 1, k);
        y = h(k + 2, k);
        z = h(k + 3, k);
      }
    }
    // final 2-element reflector at the bottom of the window
    {
      const std::ptrdiff_t k = ihi - 1;
      double v[2] = {h(k, k - 1), h(k + 1, k - 1)};
      const double tau = make_reflector(std::span<double>(v, 2));
      std::span<const double> vtail(v + 1, 1);
      h(k, k - 1) = v[0];
      h(k + 1, k - 1) = 0.0;
      apply_reflector_left(h, k, 2, vtail, tau, k, ihi + 1);
      apply_reflector_right(h, k, 2, vtail, tau, ilo, ihi + 1);
    }
  }
  return eigs;
}

Matrix w_orthonormal_complement(const Matrix& v, std::span<const double> w) {
  const std::size_t n = v.rows(), np = v.cols();
  require(w.size() == n, "w_orthonormal_complement: weight size mismatch");
  for (std::size_t i = 0; i < n; ++i)
    if (w[i] <= 0.0)
      throw std::runtime_error("w_orthonormal_complement: indefinite norm (weight " +
                               std::to_string(i) + " is not positive)");

  std::vector<double> sq(n), isq(n);
  for (std::size_t i = 0; i < n; ++i) {
    sq[i] = std::sqrt(w[i]);
    isq[i] = 1.0 / sq[i];
  }

  // precondition: V^T W V = I
  {
    Matrix wv = v;
    wv.scale_rows(w);
    Matrix gram = multiply_at_b(v, wv);
    Matrix delta = gram - Matrix::identity(np);
    if (delta.max_abs() > 1e-11)
      throw std::invalid_argument("w_orthonormal_complement: V is not W-orthonormal");
  }

  if (np >= n) return Matrix(n, 0);

  Matrix vt = v;  // sqrt(W) V, Euclidean-orthonormal columns
  vt.scale_rows(sq);

  std::vector<double> tau(np, 0.0), col(n);
  for (std::size_t k = 0; k < np; ++k) {
    for (std::size_t i = k; i < n; ++i) col[i - k] = vt(i, k);
    tau[k] = make_reflector(std::span<double>(col.data(), n - k));
    for (std::size_t i = k; i < n; ++i) vt(i, k) = col[i - k];
    apply_reflector_left(vt, k, n - k, std::span<const double>(col.data() + 1, n - k - 1),
                         tau[k], k + 1, np);
  }

  // trailing columns of Q: apply the reflectors in reverse to [e_{np}, ..., e_{n-1}]
  Matrix q(n, n - np);
  for (std::size_t j = 0; j < n - np; ++j) q(np + j, j) = 1.0;
  std::vector<double> vtail(n);
  for (std::size_t kk = np; kk-- > 0;) {
    if (tau[kk] == 0.0) continue;
    const std::size_t len = n - kk;
    for (std::size_t i = 1; i < len; ++i) vtail[i - 1] = vt(kk + i, kk);
    apply_reflector_left(q, kk, len, std::span<const double>(vtail.data(), len - 1),
                         tau[kk], 0, n - np);
  }
  q.scale_rows(isq);
  return q;
}

double max_symmetric_eig(const Matrix& a) {
  check_square(a, "max_symmetric_eig");
  const std::size_t n = a.rows();
  Matrix s(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) s(i, j) = 0.5 * (a(i, j) + a(j, i));
  const ComplexList ev = eig_general(s);
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& l : ev) m = std::max(m, l.real());
  return m;
}

}  // namespace mcsbp::densela
