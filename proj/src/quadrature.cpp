#include "fracpoisson/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "fracpoisson/errors.hpp"

namespace fracpoisson::quadrature {

GaussLegendre gauss_legendre(int n) {
  if (n < 1 || n > 200) throw ConfigurationError("gauss_legendre: point count must be in [1, 200]");
  GaussLegendre rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
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
    rule.nodes[n - 1 - i] = 0.5 * (1.0 + x);
    rule.weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

SimplexRule simplex_rule(int dim, int order) {
  if (dim != 2 && dim != 3) throw ConfigurationError("simplex_rule: dimension must be 2 or 3");
  if (order < 0) throw ConfigurationError("simplex_rule: order must be non-negative");
  SimplexRule rule;
  rule.dim = dim;
  if (dim == 2) {
    const auto g = gauss_legendre((order + 3) / 2);
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
      for (std::size_t j = 0; j < g.nodes.size(); ++j) {
        const double u = g.nodes[i];
        const double x = u;
        const double y = g.nodes[j] * (1.0 - u);
        rule.barycentric.insert(rule.barycentric.end(), {1.0 - x - y, x, y});
        rule.weights.push_back(2.0 * g.weights[i] * g.weights[j] * (1.0 - u));
      }
    }
    return rule;
  }
  const auto g = gauss_legendre((order + 4) / 2);
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    for (std::size_t j = 0; j < g.nodes.size(); ++j) {
      for (std::size_t k = 0; k < g.nodes.size(); ++k) {
        const double u = g.nodes[i];
        const double v = g.nodes[j];
        const double x = u;
        const double y = v * (1.0 - u);
        const double z = g.nodes[k] * (1.0 - u) * (1.0 - v);
        rule.barycentric.insert(rule.barycentric.end(), {1.0 - x - y - z, x, y, z});
        rule.weights.push_back(6.0 * g.weights[i] * g.weights[j] * g.weights[k] * (1.0 - u) * (1.0 - u) *
                               (1.0 - v));
      }
    }
  }
  return rule;
}

}  // namespace fracpoisson::quadrature
