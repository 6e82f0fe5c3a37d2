#pragma once

#include <vector>

namespace fracpoisson::quadrature {

struct GaussLegendre {
  std::vector<double> nodes;  // on [0, 1]
  std::vector<double> weights;
};

GaussLegendre gauss_legendre(int n);

// Points as barycentric tuples (dim+1 entries each); weights sum to 1.
struct SimplexRule {
  int dim = 0;
  std::vector<double> barycentric;
  std::vector<double> weights;
  std::size_t size() const noexcept { return weights.size(); }
};

// Collapsed Gauss-Legendre rule exact for polynomials of total degree `order`.
SimplexRule simplex_rule(int dim, int order);

}  // namespace fracpoisson::quadrature
