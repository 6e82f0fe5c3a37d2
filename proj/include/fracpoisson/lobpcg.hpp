#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "fracpoisson/fem.hpp"
#include "fracpoisson/mgsolve.hpp"

namespace fracpoisson::lobpcg {

struct Options {
  std::size_t block_size = 0;  // 0: min(count + 10, 40)
  double tol = 1e-8;           // ||S x - lambda M x||_2 <= tol * lambda * ||x||_M
  int max_iterations = 2000;
  std::uint64_t seed = 20240611;
};

struct EigenPairs {
  std::vector<double> values;                // ascending
  std::vector<std::vector<double>> vectors;  // M-orthonormal
  std::vector<double> residuals;             // ||S x - lambda M x||_2
  int iterations = 0;
};

// Smallest `count` generalized eigenpairs of S x = lambda M x, preconditioned by a
// sigma = 0 V-cycle of `precond` (whose finest level must match S and M).
EigenPairs solve(const fem::SparseOperator& stiffness, const fem::SparseOperator& mass,
                 const mgsolve::MgHierarchy& precond, std::size_t count, const Options& options = {});

}  // namespace fracpoisson::lobpcg
