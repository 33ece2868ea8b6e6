#ifndef LAGFREE_QUADRATURE_HPP
#define LAGFREE_QUADRATURE_HPP

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

namespace lagfree::quadrature {

struct Rule1d {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

/// Gauss-Legendre rule with n points (Newton on the Legendre recurrence).
inline Rule1d gauss_legendre(int n) {
  Rule1d rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes[i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

struct TrianglePoint {
  std::array<double, 3> bary;
  double weight;  // fraction of the triangle area; weights sum to 1
};

/// Collapsed-square Gauss rule on a triangle, exact for degree 2n-2.
inline std::vector<TrianglePoint> triangle_rule(int n) {
  const Rule1d g = gauss_legendre(n);
  std::vector<TrianglePoint> pts;
  pts.reserve(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    const double s = 0.5 * (g.nodes[i] + 1.0);
    for (int j = 0; j < n; ++j) {
      const double t = 0.5 * (g.nodes[j] + 1.0);
      const double l1 = s;
      const double l2 = (1.0 - s) * t;
      // area of reference triangle is 1/2, Jacobian (1 - s)/4 of the map.
      const double w = g.weights[i] * g.weights[j] * (1.0 - s) * 0.25 * 2.0;
      pts.push_back({{1.0 - l1 - l2, l1, l2}, w});
    }
  }
  return pts;
}

}  // namespace lagfree::quadrature

#endif  // LAGFREE_QUADRATURE_HPP
