#pragma once

#include <cstddef>
#include <vector>

#include "fracpoisson/extension.hpp"
#include "fracpoisson/mesh.hpp"
#include "fracpoisson/solver.hpp"

namespace fracpoisson::verify {

struct SeriesValue {
  double value = 0.0;  // ||U||^2 in the weighted energy norm
  std::size_t terms_used = 0;
  double tail_bound = 0.0;
};

// Exact energies for the built-in right-hand sides.
// zero_limit: eigenvalues sqrt(lambda) below it are summed, the rest estimated
SeriesValue energy_disc(const extension::FractionalParams& p, double zero_limit = 1e5);
SeriesValue energy_square(const extension::FractionalParams& p);
SeriesValue energy_cube(const extension::FractionalParams& p);
SeriesValue energy(mesh::Domain domain, const extension::FractionalParams& p);

// L2-normalized sine coefficient of [x(1-x)]^{r-1/2} for mode p >= 1 (zero for even p).
double sine_coefficient(int p, double r);

// Plain truncated sums over odd modes up to p_max; slow reference values.
double energy_square_direct(const extension::FractionalParams& p, int p_max);
double energy_cube_direct(const extension::FractionalParams& p, int p_max);

struct ErrorValue {
  double error = 0.0;        // sqrt of the clamped squared error
  double squared = 0.0;      // before clamping
  bool clamped = false;      // squared error below -1e-12 * energy
};

// ||U||^2 - 2 d_s <f, u> + ||U_h||^2 with the exact <f, u> from an order-8 load.
ErrorValue h1alpha_error(const solver::ProblemSpec& spec, const solver::Solution& solution, const SeriesValue& energy);

// Trace of the full tensor-product Galerkin system, solved densely. Requires n * M_tilde <= 5000.
std::vector<double> kron_oracle_solve(const solver::ProblemSpec& spec, const solver::Discretization& disc);

inline constexpr std::size_t kKronLimit = 5000;

}  // namespace fracpoisson::verify
