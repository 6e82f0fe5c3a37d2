#include <cmath>
#include <cstring>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "fracpoisson/errors.hpp"
#include "fracpoisson/extension.hpp"
#include "fracpoisson/fem.hpp"
#include "fracpoisson/mesh.hpp"
#include "fracpoisson/solver.hpp"
#include "fracpoisson/verify.hpp"

using namespace fracpoisson;
using extension::make_params;
using std::numbers::pi;

namespace {

double energy_norm(const fem::SparseOperator& a, const std::vector<double>& x) {
  std::vector<double> y(x.size());
  a.apply(x, y);
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return std::sqrt(std::max(0.0, s));
}

std::vector<double> minus(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] - b[i];
  return c;
}

solver::ProblemSpec make_spec(mesh::Domain domain, double s, double r, int k, int level) {
  solver::ProblemSpec spec;
  spec.domain = domain;
  spec.params = make_params(s, r);
  spec.k = k;
  spec.level = level;
  return spec;
}

}  // namespace

TEST_CASE("zero data gives a zero solution") {
  auto spec = make_spec(mesh::Domain::square, 0.5, 2.0, 1, 3);
  spec.rhs = [](std::span<const double>) { return 0.0; };
  mesh::MeshHierarchy mh(spec.domain);
  const auto sol = solver::solve(spec, mh);
  for (double v : sol.trace_coefficients) CHECK(v == 0.0);
  for (int it : sol.report.iterations) CHECK(it == 0);
  CHECK(sol.discrete_energy == 0.0);
  CHECK(solver::htrace_error_inner(spec, sol) == 0.0);
}

TEST_CASE("square eigenfunction is scaled by lambda^{-s}") {
  auto spec = make_spec(mesh::Domain::square, 0.5, 2.0, 1, 6);
  spec.rhs = [](std::span<const double> x) { return 2 * std::sin(pi * x[0]) * std::sin(pi * x[1]); };
  mesh::MeshHierarchy mh(spec.domain);
  const auto sol = solver::solve(spec, mh);
  const double scale = std::pow(2 * pi * pi, -0.5);
  const auto exact = [&](std::span<const double> x) { return scale * 2 * std::sin(pi * x[0]) * std::sin(pi * x[1]); };
  const double err = fem::l2_error(sol.disc->fine(), sol.trace_coefficients, exact, 6);
  CHECK(err <= 1e-3);
  CHECK(sol.report.N == sol.report.n * sol.report.M_tilde);
  CHECK(sol.report.mean_iterations > 0.0);
  CHECK(sol.report.mean_iterations < 20.0);
}

TEST_CASE("the solution map is linear") {
  auto spec = make_spec(mesh::Domain::disc, 0.25, 2.0, 1, 3);
  mesh::MeshHierarchy mh(spec.domain);
  auto disc = std::make_shared<const solver::Discretization>(solver::discretize(spec, mh));
  const auto u1 = solver::solve(spec, disc).trace_coefficients;
  // same discretization, load scaled by 3 through a second spec sharing the shifts
  auto scaled = std::make_shared<solver::Discretization>(solver::discretize(spec, mh));
  for (double& v : scaled->load) v *= 3.0;
  const auto u3 = solver::solve(spec, std::shared_ptr<const solver::Discretization>(scaled)).trace_coefficients;
  double worst = 0.0, size = 0.0;
  for (std::size_t i = 0; i < u1.size(); ++i) {
    worst = std::max(worst, std::abs(u3[i] - 3 * u1[i]));
    size = std::max(size, std::abs(u1[i]));
  }
  CHECK(worst <= 1e-9 * size);
}

TEST_CASE("stronger fractional order shrinks the solution for spectrally large data") {
  // lambda_1 > 1 on the square, so lambda^{-s} decreases in s for every mode
  double previous = 1e300;
  for (double s : {0.25, 0.5, 0.75}) {
    auto spec = make_spec(mesh::Domain::square, s, 2.0, 1, 4);
    mesh::MeshHierarchy mh(spec.domain);
    const auto sol = solver::solve(spec, mh);
    const double bare = sol.discrete_energy / (spec.params.d_s * spec.params.d_s);
    CHECK(bare < previous);
    previous = bare;
  }
}

TEST_CASE("reduced solve equals the Kronecker system") {
  struct Case {
    mesh::Domain domain;
    double s, r;
    int k, level;
    double c_m;
  };
  const Case cases[] = {{mesh::Domain::square, 0.25, 0.5, 1, 3, 200.0},
                        {mesh::Domain::disc, 0.75, 0.5, 1, 2, 40.0},
                        {mesh::Domain::disc, 0.25, 0.5, 1, 3, 40.0},
                        {mesh::Domain::square, 0.5, 2.0, 2, 2, 200.0}};
  int checked = 0;
  for (const auto& c : cases) {
    auto spec = make_spec(c.domain, c.s, c.r, c.k, c.level);
    spec.cg_tol = 1e-13;
    spec.constants.c_m = c.c_m;
    mesh::MeshHierarchy mh(spec.domain);
    auto disc = std::make_shared<const solver::Discretization>(solver::discretize(spec, mh));
    CAPTURE(disc->fine().n());
    CAPTURE(disc->factor.lambda_diag.size());
    REQUIRE(disc->fine().n() * disc->factor.lambda_diag.size() <= verify::kKronLimit);
    CHECK(disc->factor.lambda_diag.size() >= 3);
    const auto reduced = solver::solve(spec, disc).trace_coefficients;
    const auto kron = verify::kron_oracle_solve(spec, *disc);
    const double diff = energy_norm(disc->stiffness(), minus(reduced, kron));
    CHECK(diff <= 1e-8 * energy_norm(disc->stiffness(), kron));
    ++checked;
  }
  CHECK(checked >= 3);
}

TEST_CASE("Kronecker oracle refuses large systems") {
  auto spec = make_spec(mesh::Domain::disc, 0.25, 0.5, 1, 3);
  spec.constants.c_m = 200.0;
  mesh::MeshHierarchy mh(spec.domain);
  const auto disc = solver::discretize(spec, mh);
  REQUIRE(disc.fine().n() * disc.factor.lambda_diag.size() > verify::kKronLimit);
  CHECK_THROWS_AS(verify::kron_oracle_solve(spec, disc), ConfigurationError);
}

TEST_CASE("solver tolerance barely moves the error") {
  auto spec = make_spec(mesh::Domain::disc, 0.5, 2.0, 1, 4);
  const auto energy = verify::energy(spec.domain, spec.params);
  mesh::MeshHierarchy mh(spec.domain);
  auto disc = std::make_shared<const solver::Discretization>(solver::discretize(spec, mh));
  const auto tight = verify::h1alpha_error(spec, solver::solve(spec, disc), energy);
  spec.cg_tol = 1e-8;
  const auto loose = verify::h1alpha_error(spec, solver::solve(spec, disc), energy);
  CHECK(std::abs(tight.error - loose.error) <= 1e-3 * tight.error);
  CHECK_FALSE(tight.clamped);
}

TEST_CASE("error inner product is insensitive to the quadrature order") {
  auto spec = make_spec(mesh::Domain::square, 0.25, 2.0, 2, 3);
  mesh::MeshHierarchy mh(spec.domain);
  const auto sol = solver::solve(spec, mh);
  const double q8 = solver::htrace_error_inner(spec, sol);
  const auto load12 = fem::assemble_load(sol.disc->fine(), solver::effective_rhs(spec), 12);
  double q12 = 0.0;
  for (std::size_t i = 0; i < load12.size(); ++i) q12 += load12[i] * sol.trace_coefficients[i];
  const auto err = verify::h1alpha_error(spec, sol, verify::energy(spec.domain, spec.params));
  CHECK(std::abs(q8 - q12) <= 1e-10);
  CHECK(2 * spec.params.d_s * std::abs(q8 - q12) <= 1e-2 * err.squared);
}

TEST_CASE("thread count does not change a single bit") {
  auto spec = make_spec(mesh::Domain::disc, 0.25, 2.0, 1, 3);
  mesh::MeshHierarchy mh(spec.domain);
  auto disc = std::make_shared<const solver::Discretization>(solver::discretize(spec, mh));
  const auto one = solver::solve(spec, disc);
  spec.threads = 3;
  const auto three = solver::solve(spec, disc);
  REQUIRE(one.trace_coefficients.size() == three.trace_coefficients.size());
  CHECK(std::memcmp(one.trace_coefficients.data(), three.trace_coefficients.data(),
                    one.trace_coefficients.size() * sizeof(double)) == 0);
  CHECK(one.report.iterations == three.report.iterations);
}

TEST_CASE("zero approximation has the full energy as error") {
  auto spec = make_spec(mesh::Domain::square, 0.5, 2.0, 1, 2);
  mesh::MeshHierarchy mh(spec.domain);
  auto sol = solver::solve(spec, mh);
  std::fill(sol.trace_coefficients.begin(), sol.trace_coefficients.end(), 0.0);
  sol.discrete_energy = 0.0;
  const auto e = verify::energy(spec.domain, spec.params);
  CHECK(verify::h1alpha_error(spec, sol, e).error == doctest::Approx(std::sqrt(e.value)).epsilon(1e-14));
}

TEST_CASE("error decreases under refinement without clamping") {
  for (auto domain : {mesh::Domain::disc, mesh::Domain::square}) {
    const auto p = make_params(0.5, 2.0);
    const auto e = verify::energy(domain, p);
    mesh::MeshHierarchy mh(domain);
    double previous = 1e300;
    for (int level = 3; level <= 5; ++level) {
      auto spec = make_spec(domain, 0.5, 2.0, 1, level);
      const auto err = verify::h1alpha_error(spec, solver::solve(spec, mh), e);
      CHECK_FALSE(err.clamped);
      CHECK(err.squared > 0.0);
      CHECK(err.error < previous);
      previous = err.error;
    }
  }
}

TEST_CASE("invalid problems are rejected") {
  mesh::MeshHierarchy mh(mesh::Domain::square);
  auto spec = make_spec(mesh::Domain::square, 0.5, 0.25, 1, 2);
  CHECK_THROWS_AS(solver::solve(spec, mh), ConfigurationError);
  spec = make_spec(mesh::Domain::square, 0.5, 2.0, 3, 2);
  CHECK_THROWS_AS(solver::solve(spec, mh), ConfigurationError);
  spec = make_spec(mesh::Domain::disc, 0.5, 2.0, 1, 2);
  CHECK_THROWS_AS(solver::solve(spec, mh), ConfigurationError);
}
