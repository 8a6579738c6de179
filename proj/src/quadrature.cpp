#include "mcsbp/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace mcsbp::quadrature {

namespace {

void require_even_q(int q, const char* who) {
  if (q < 2 || q % 2 != 0)
    throw std::invalid_argument(std::string(who) + ": q must be even and >= 2, got " +
                                std::to_string(q));
}

/// Legendre P_n and its derivative at x by the three-term recurrence.
void legendre(int n, double x, double& p, double& dp) {
  double p0 = 1.0, p1 = x;
  if (n == 0) {
    p = 1.0;
    dp = 0.0;
    return;
  }
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  p = p1;
  dp = n * (x * p1 - p0) / (x * x - 1.0);
}

double pow_int(double x, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

/// All degree-<=cap monomial moments checked against the analytic values.
int exactness_scan(const std::vector<basis::Point>& nodes,
                   const std::vector<double>& weights, int cap,
                   bool edge_mode, const std::vector<double>& params, double half_len) {
  int achieved = -1;
  for (int d = 0; d <= cap; ++d) {
    bool ok = true;
    for (int a = 0; a <= d && ok; ++a) {
      const int b = d - a;
      if (edge_mode && a > 0) continue;  // edge moments are 1D in the parameter
      double sum = 0.0, scale = 0.0;
      if (edge_mode) {
        for (std::size_t k = 0; k < params.size(); ++k) {
          const double term = weights[k] * pow_int(params[k], b);
          sum += term;
          scale += std::fabs(term);
        }
        const double exact = (b % 2 == 0) ? 2.0 * half_len / (b + 1.0) : 0.0;
        ok = std::fabs(sum - exact) <= 1e-12 * std::max(1.0, scale);
      } else {
        for (std::size_t k = 0; k < nodes.size(); ++k) {
          const double term =
              weights[k] * pow_int(nodes[k].x1, a) * pow_int(nodes[k].x2, b);
          sum += term;
          scale += std::fabs(term);
        }
        const double exact = tri_monomial_moment(a, b);
        ok = std::fabs(sum - exact) <= 1e-12 * std::max(1.0, scale);
      }
    }
    if (!ok) break;
    achieved = d;
  }
  return achieved;
}

}  // namespace

Rule1D gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
  Rule1D rule;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 0.0);
  // Newton from the Chebyshev guess; compute the lower half and mirror
  for (int k = 0; k < (n + 1) / 2; ++k) {
    double x = -std::cos(std::numbers::pi * (k + 0.75) / (n + 0.5));
    if (n % 2 == 1 && k == n / 2) x = 0.0;
    double p, dp;
    for (int it = 0; it < 100; ++it) {
      legendre(n, x, p, dp);
      const double dx = p / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-15) break;
    }
    legendre(n, x, p, dp);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[k] = x;
    rule.weights[k] = w;
    rule.nodes[n - 1 - k] = -x;
    rule.weights[n - 1 - k] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

TriQuadrature collapsed_tri_rule(int q) {
  require_even_q(q, "collapsed_tri_rule");
  const int n1 = q / 2 + 1;
  const Rule1D lg = gauss_legendre(n1);

  TriQuadrature rule;
  rule.collapsed_1d = lg;
  rule.nodes.reserve(static_cast<std::size_t>(n1) * n1);
  rule.weights.reserve(static_cast<std::size_t>(n1) * n1);
  // degenerate square-to-triangle map: x1 = (1+xi1)(1-xi2)/2 - 1, x2 = xi2,
  // Jacobian (1-xi2)/2
  for (int i2 = 0; i2 < n1; ++i2) {
    const double xi2 = lg.nodes[i2];
    for (int i1 = 0; i1 < n1; ++i1) {
      const double xi1 = lg.nodes[i1];
      rule.nodes.push_back({0.5 * (1.0 + xi1) * (1.0 - xi2) - 1.0, xi2});
      rule.weights.push_back(lg.weights[i1] * lg.weights[i2] * 0.5 * (1.0 - xi2));
    }
  }
  rule.strictly_positive = true;
  // the moment checker caps at degree 30; very-high-order rules saturate there
  const int cap = std::min(q, 30);
  rule.verified_degree = max_exact_degree(rule, cap);
  if (rule.verified_degree < cap)
    throw std::runtime_error("collapsed_tri_rule: exactness check failed at degree " +
                             std::to_string(rule.verified_degree + 1));
  return rule;
}

FaceSet tri_edge_rules(int q) {
  require_even_q(q, "tri_edge_rules");
  const int n1 = q / 2 + 1;
  const Rule1D lg = gauss_legendre(n1);

  FaceSet fs;
  const basis::Point v1{-1.0, -1.0}, v2{1.0, -1.0}, v3{-1.0, 1.0};
  fs.edges[kEdgeBottom].segment = {v1, v2};
  fs.edges[kEdgeBottom].normal_x1 = 0.0;
  fs.edges[kEdgeBottom].normal_x2 = -1.0;
  fs.edges[kEdgeLeft].segment = {v1, v3};
  fs.edges[kEdgeLeft].normal_x1 = -1.0;
  fs.edges[kEdgeLeft].normal_x2 = 0.0;
  fs.edges[kEdgeHypotenuse].segment = {v2, v3};
  const double isq2 = 1.0 / std::sqrt(2.0);
  fs.edges[kEdgeHypotenuse].normal_x1 = isq2;
  fs.edges[kEdgeHypotenuse].normal_x2 = isq2;

  for (Edge& e : fs.edges) {
    const double dx1 = e.segment.b.x1 - e.segment.a.x1;
    const double dx2 = e.segment.b.x2 - e.segment.a.x2;
    e.length = std::hypot(dx1, dx2);
    e.nodes.reserve(n1);
    e.weights.reserve(n1);
    for (int k = 0; k < n1; ++k) {
      e.nodes.push_back(e.segment.at(lg.nodes[k]));
      e.weights.push_back(lg.weights[k] * 0.5 * e.length);
    }
  }
  return fs;
}

TriQuadrature liu_4c_rule() {
  TriQuadrature rule;
  const basis::Point v[3] = {{-1.0, -1.0}, {1.0, -1.0}, {-1.0, 1.0}};
  auto bary = [&](double l1, double l2, double l3) -> basis::Point {
    return {l1 * v[0].x1 + l2 * v[1].x1 + l3 * v[2].x1,
            l1 * v[0].x2 + l2 * v[1].x2 + l3 * v[2].x2};
  };
  auto push_orbit3 = [&](double la, double lb, double w) {
    rule.nodes.push_back(bary(la, lb, lb));
    rule.nodes.push_back(bary(lb, la, lb));
    rule.nodes.push_back(bary(lb, lb, la));
    rule.weights.insert(rule.weights.end(), 3, w);
  };
  push_orbit3(1.0, 0.0, -1.0 / 30.0);                  // vertices
  push_orbit3(0.0, 0.5, 4.0 / 25.0);                   // edge midpoints
  push_orbit3(5.0 / 6.0, 1.0 / 12.0, 64.0 / 225.0);    // median orbit
  rule.nodes.push_back(bary(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0));
  rule.weights.push_back(23.0 / 30.0);

  rule.strictly_positive = false;
  rule.verified_degree = max_exact_degree(rule, 5);
  if (rule.verified_degree != 4)
    throw std::runtime_error("liu_4c_rule: moment check failed (degree " +
                             std::to_string(rule.verified_degree) + ")");
  return rule;
}

double tri_monomial_moment(int a, int b) {
  // iterated integration: int_{-1}^{1} int_{-1}^{-x1} x1^a x2^b dx2 dx1
  auto line_int = [](int n) { return (n % 2 == 0) ? 2.0 / (n + 1.0) : 0.0; };
  const double sign = (b % 2 == 0) ? -1.0 : 1.0;  // (-1)^(b+1)
  return sign / (b + 1.0) * (line_int(a + b + 1) - line_int(a));
}

int max_exact_degree(const TriQuadrature& rule, int cap) {
  if (cap > 30) throw std::invalid_argument("max_exact_degree: cap must be <= 30");
  return exactness_scan(rule.nodes, rule.weights, cap, false, {}, 0.0);
}

int max_exact_degree(const Edge& edge, int cap) {
  if (cap > 30) throw std::invalid_argument("max_exact_degree: cap must be <= 30");
  // recover the parameter of each node from the segment endpoints
  std::vector<double> params(edge.nodes.size());
  const double dx1 = edge.segment.b.x1 - edge.segment.a.x1;
  const double dx2 = edge.segment.b.x2 - edge.segment.a.x2;
  const double len2 = dx1 * dx1 + dx2 * dx2;
  for (std::size_t k = 0; k < edge.nodes.size(); ++k) {
    const double px1 = edge.nodes[k].x1 - 0.5 * (edge.segment.a.x1 + edge.segment.b.x1);
    const double px2 = edge.nodes[k].x2 - 0.5 * (edge.segment.a.x2 + edge.segment.b.x2);
    params[k] = 2.0 * (px1 * dx1 + px2 * dx2) / len2;
  }
  return exactness_scan({}, edge.weights, cap, true, params, 0.5 * edge.length);
}

}  // namespace mcsbp::quadrature
