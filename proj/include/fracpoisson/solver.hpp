#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include "fracpoisson/extension.hpp"
#include "fracpoisson/fem.hpp"
#include "fracpoisson/mesh.hpp"
#include "fracpoisson/mgsolve.hpp"
#include "fracpoisson/spectrum.hpp"

namespace fracpoisson::solver {

inline constexpr int kSolveQuadOrder = 4;
inline constexpr int kErrorQuadOrder = 8;

struct ProblemSpec {
  mesh::Domain domain = mesh::Domain::disc;
  extension::FractionalParams params = extension::make_params(0.25, 2.0);
  int k = 1;
  int level = 3;
  fem::ScalarField rhs;  // empty: the built-in family for the domain
  double cg_tol = 1e-10;
  spectrum::Constants constants;
  int threads = 1;
};

// disc (1-|x|^2)^{r-1/2}, square/cube prod x_i(1-x_i) raised to r-1/2
fem::ScalarField builtin_rhs(mesh::Domain domain, double r);
fem::ScalarField effective_rhs(const ProblemSpec& spec);

struct SolveReport {
  std::size_t n = 0, M = 0, M_tilde = 0, N = 0;
  std::size_t m0 = 0;
  int coarse_level = -1;
  int mg_levels = 0;
  int factor_digits = 0;
  int eig_iterations = 0;
  std::vector<double> shifts;   // Lambda_m, ascending
  std::vector<int> iterations;  // per shift, same order
  double mean_iterations = 0.0;
  double setup_ms = 0.0;  // assembly, multigrid setup, spectral factorization
  double eig_ms = 0.0;    // eigenvalue approximation
  double solve_ms = 0.0;
  std::size_t fem_values = 0, weyl_values = 0;  // provenance of the decimated spectrum
};

// Everything the reduced solve needs, shared with the Kronecker oracle.
struct Discretization {
  std::vector<fem::FeSpace> spaces;  // multigrid levels, coarse to fine
  std::vector<int> level_numbers;
  mgsolve::MgHierarchy mg;
  spectrum::PipelineResult spectrum;
  extension::SpectralFactorization factor;
  std::vector<double> load;  // d_s <f, phi_i> at the solve quadrature order
  double setup_ms = 0.0;
  double eig_ms = 0.0;

  const fem::FeSpace& fine() const { return spaces.back(); }
  const fem::SparseOperator& mass() const { return *mg.level(mg.num_levels() - 1).mass; }
  const fem::SparseOperator& stiffness() const { return *mg.level(mg.num_levels() - 1).stiffness; }
};

Discretization discretize(const ProblemSpec& spec, mesh::MeshHierarchy& hierarchy);

struct Solution {
  std::vector<double> trace_coefficients;  // free dofs of the fine space
  SolveReport report;
  std::shared_ptr<const Discretization> disc;
  // d_s <f_h, u> with the load used by the solve; equals the discrete energy
  double discrete_energy = 0.0;
};

Solution solve(const ProblemSpec& spec, mesh::MeshHierarchy& hierarchy);
Solution solve(const ProblemSpec& spec, std::shared_ptr<const Discretization> disc);

// <f, u_{h,M}> with an order-8 quadrature load vector.
double htrace_error_inner(const ProblemSpec& spec, const Solution& solution);

}  // namespace fracpoisson::solver
