#include "mcsbp/basis.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mcsbp::basis {

namespace {

/// Orthonormal Jacobi polynomials P_0..P_n at x for weight (1-x)^al (1+x)^be,
/// normalized to unit L2 norm on [-1, 1] with that weight.
void jacobi_all(double x, int al, int be, int n, std::span<double> out) {
  const double ga0 = std::pow(2.0, al + be + 1) / (al + be + 1) *
                     (std::tgamma(al + 1.0) * std::tgamma(be + 1.0) /
                      std::tgamma(static_cast<double>(al + be + 1)));
  out[0] = 1.0 / std::sqrt(ga0);
  if (n == 0) return;
  const double ga1 = (al + 1.0) * (be + 1.0) / (al + be + 3.0) * ga0;
  out[1] = ((al + be + 2.0) * x / 2.0 + (al - be) / 2.0) / std::sqrt(ga1);
  double aold = 2.0 / (2.0 + al + be) *
                std::sqrt((al + 1.0) * (be + 1.0) / (al + be + 3.0));
  for (int i = 1; i < n; ++i) {
    const double h1 = 2.0 * i + al + be;
    const double anew = 2.0 / (h1 + 2.0) *
                        std::sqrt((i + 1.0) * (i + 1.0 + al + be) * (i + 1.0 + al) *
                                  (i + 1.0 + be) / (h1 + 1.0) / (h1 + 3.0));
    const double bnew = -(static_cast<double>(al) * al - static_cast<double>(be) * be) /
                        (h1 * (h1 + 2.0));
    out[i + 1] = ((x - bnew) * out[i] - aold * out[i - 1]) / anew;
    aold = anew;
  }
}

/// d/dx of the orthonormal Jacobi polynomials: P'_n = sqrt(n (n+al+be+1)) *
/// P^{(al+1,be+1)}_{n-1}.
void jacobi_grad_all(double x, int al, int be, int n, std::span<double> out) {
  out[0] = 0.0;
  if (n == 0) return;
  std::vector<double> shifted(n);
  jacobi_all(x, al + 1, be + 1, n - 1, shifted);
  for (int k = 1; k <= n; ++k)
    out[k] = std::sqrt(k * (k + al + be + 1.0)) * shifted[k - 1];
}

double pow_int(double x, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

constexpr double kDomainTol = 1e-12;

void check_in_triangle(const Point& pt) {
  if (pt.x1 < -1.0 - kDomainTol || pt.x2 < -1.0 - kDomainTol ||
      pt.x1 + pt.x2 > kDomainTol)
    throw std::domain_error("eval_vandermonde: point (" + std::to_string(pt.x1) + ", " +
                            std::to_string(pt.x2) + ") outside the reference triangle");
}

/// Collapsed coordinates a = 2(1+x1)/(1-x2) - 1, b = x2, with the vertex limit
/// a = -1 at x2 = 1 (the (1-b)^i factors absorb the singularity there).
void collapsed_coords(const Point& pt, double& a, double& b) {
  b = pt.x2;
  a = (1.0 - b > kDomainTol) ? 2.0 * (1.0 + pt.x1) / (1.0 - b) - 1.0 : -1.0;
}

VandermondeSet eval_impl(int p, std::span<const Point> pts, bool gradients) {
  if (p < 0) throw std::invalid_argument("eval_vandermonde: degree must be >= 0");
  const PolyBasis pb = make_basis(p);
  const std::size_t n = pts.size();
  const int np = pb.dim();

  VandermondeSet vs;
  vs.points.assign(pts.begin(), pts.end());
  vs.v = densela::Matrix(n, np);
  if (gradients) {
    vs.v_x1 = densela::Matrix(n, np);
    vs.v_x2 = densela::Matrix(n, np);
  }

  const double sqrt2 = std::sqrt(2.0);
  std::vector<double> fa(p + 1), gb(p + 1), dfa(p + 1), dgb(p + 1);

  for (std::size_t k = 0; k < n; ++k) {
    check_in_triangle(pts[k]);
    double a, b;
    collapsed_coords(pts[k], a, b);

    jacobi_all(a, 0, 0, p, fa);
    if (gradients) jacobi_grad_all(a, 0, 0, p, dfa);

    for (int col = 0; col < np; ++col) {
      const auto [i, j] = pb.index_pairs[col];
      jacobi_all(b, 2 * i + 1, 0, j, gb);
      const double omb_i = pow_int(1.0 - b, i);
      vs.v(k, col) = sqrt2 * fa[i] * gb[j] * omb_i;

      if (!gradients) continue;
      jacobi_grad_all(b, 2 * i + 1, 0, j, dgb);
      if (i == 0) {
        vs.v_x1(k, col) = 0.0;
        vs.v_x2(k, col) = sqrt2 * fa[0] * dgb[j];
      } else {
        const double omb_im1 = pow_int(1.0 - b, i - 1);
        vs.v_x1(k, col) = 2.0 * sqrt2 * dfa[i] * gb[j] * omb_im1;
        vs.v_x2(k, col) =
            sqrt2 * (dfa[i] * gb[j] * (1.0 + a) * omb_im1 +
                     fa[i] * (dgb[j] * omb_i - i * gb[j] * omb_im1));
      }
    }
  }
  return vs;
}

}  // namespace

int basis_dim(int p) {
  if (p < 0) throw std::invalid_argument("basis_dim: degree must be >= 0");
  return (p + 1) * (p + 2) / 2;
}

PolyBasis make_basis(int p) {
  PolyBasis pb;
  pb.degree = p;
  pb.index_pairs.reserve(basis_dim(p));
  for (int d = 0; d <= p; ++d)
    for (int j = 0; j <= d; ++j) pb.index_pairs.emplace_back(d - j, j);
  return pb;
}

VandermondeSet eval_vandermonde(int p, std::span<const Point> pts) {
  return eval_impl(p, pts, false);
}

VandermondeSet eval_grad_vandermonde(int p, std::span<const Point> pts) {
  return eval_impl(p, pts, true);
}

densela::Matrix eval_on_curve(int p, std::span<const double> params, const Segment& seg) {
  std::vector<Point> pts(params.size());
  for (std::size_t k = 0; k < params.size(); ++k) pts[k] = seg.at(params[k]);
  return eval_impl(p, pts, false).v;
}

}  // namespace mcsbp::basis
