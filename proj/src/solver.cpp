#include "fracpoisson/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <numeric>
#include <string>
#include <thread>

#include "fracpoisson/errors.hpp"

namespace fracpoisson::solver {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0, c = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double y = a[i] * b[i] - c;
    const double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  return s;
}

}  // namespace

fem::ScalarField builtin_rhs(mesh::Domain domain, double r) {
  const double e = r - 0.5;
  switch (domain) {
    case mesh::Domain::disc:
      return [e](std::span<const double> x) {
        return std::pow(std::max(0.0, 1.0 - x[0] * x[0] - x[1] * x[1]), e);
      };
    case mesh::Domain::square:
      return [e](std::span<const double> x) {
        return std::pow(std::max(0.0, x[0] * (1 - x[0]) * x[1] * (1 - x[1])), e);
      };
    case mesh::Domain::cube:
      return [e](std::span<const double> x) {
        return std::pow(std::max(0.0, x[0] * (1 - x[0]) * x[1] * (1 - x[1]) * x[2] * (1 - x[2])), e);
      };
  }
  throw ConfigurationError("unknown domain");
}

fem::ScalarField effective_rhs(const ProblemSpec& spec) {
  if (spec.rhs) return spec.rhs;
  if (spec.params.r < 0.5) {
    throw ConfigurationError("the built-in right-hand side needs r >= 1/2 (got r = " + std::to_string(spec.params.r) +
                             ")");
  }
  return builtin_rhs(spec.domain, spec.params.r);
}

Discretization discretize(const ProblemSpec& spec, mesh::MeshHierarchy& hierarchy) {
  if (spec.k != 1 && spec.k != 2) throw ConfigurationError("element order must be 1 or 2");
  if (spec.level < 0) throw ConfigurationError("refinement level must be non-negative");
  if (hierarchy.domain() != spec.domain) throw ConfigurationError("mesh hierarchy domain differs from the problem");
  const auto f = effective_rhs(spec);

  const auto t0 = Clock::now();
  hierarchy.extend_to(spec.level);
  std::vector<fem::FeSpace> spaces;
  std::vector<int> numbers;
  std::vector<spectrum::LevelInfo> info;
  for (int l = 0; l <= spec.level; ++l) {
    fem::FeSpace space(hierarchy.level_ptr(l), spec.k);
    if (space.n() == 0) continue;
    info.push_back({l, hierarchy.h(l), space.n()});
    numbers.push_back(l);
    spaces.push_back(std::move(space));
  }
  if (spaces.empty() || numbers.back() != spec.level) {
    throw ConfigurationError("level " + std::to_string(spec.level) + " has no interior unknowns");
  }
  auto mg = mgsolve::build_mg(spaces);
  auto load = fem::assemble_load(spaces.back(), f, kSolveQuadOrder);
  for (double& v : load) v *= spec.params.d_s;
  double setup_ms = ms_since(t0);

  const auto t1 = Clock::now();
  spectrum::PipelineInput in;
  in.mg = &mg;
  in.levels = info;
  in.params = spec.params;
  in.k = spec.k;
  in.d = hierarchy.dim();
  in.domain_measure = hierarchy.measure();
  in.constants = spec.constants;
  auto sp = spectrum::build_spectrum(in);
  const double eig_ms = ms_since(t1);

  const auto t2 = Clock::now();
  auto factor = extension::factorize(sp.approx.values, spec.params);
  setup_ms += ms_since(t2);

  return Discretization{std::move(spaces), std::move(numbers), std::move(mg), std::move(sp), std::move(factor),
                        std::move(load),   setup_ms,           eig_ms};
}

Solution solve(const ProblemSpec& spec, mesh::MeshHierarchy& hierarchy) {
  return solve(spec, std::make_shared<const Discretization>(discretize(spec, hierarchy)));
}

Solution solve(const ProblemSpec& spec, std::shared_ptr<const Discretization> disc) {
  const auto& d = *disc;
  const auto& fac = d.factor;
  const std::size_t n = d.fine().n();
  const std::size_t mt = fac.lambda_diag.size();

  Solution sol;
  auto& rep = sol.report;
  rep.n = n;
  rep.M = d.spectrum.approx.M;
  rep.M_tilde = mt;
  rep.N = n * mt;
  rep.m0 = d.spectrum.m0;
  rep.coarse_level = d.spectrum.coarse_level;
  rep.mg_levels = static_cast<int>(d.mg.num_levels());
  rep.factor_digits = fac.digits;
  rep.eig_iterations = d.spectrum.eig_iterations;
  rep.setup_ms = d.setup_ms;
  rep.eig_ms = d.eig_ms;
  rep.shifts = fac.lambda_diag;
  rep.iterations.assign(mt, 0);
  for (const auto& p : d.spectrum.approx.provenance) (p.is_weyl() ? rep.weyl_values : rep.fem_values)++;

  for (double lam : fac.lambda_diag) {
    if (!(lam >= 0.0)) throw NumericalError("negative spectral shift " + std::to_string(lam));
  }

  // Descending shifts, solved in batches of `threads`; each batch is accumulated in index order.
  std::vector<std::size_t> order(mt);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fac.lambda_diag[a] > fac.lambda_diag[b]; });
  const std::size_t threads = static_cast<std::size_t>(std::max(1, spec.threads));

  std::vector<double> u(n, 0.0), comp(n, 0.0);
  const auto t0 = Clock::now();
  std::vector<std::vector<double>> results(std::min(threads, std::max<std::size_t>(mt, 1)));
  std::vector<std::exception_ptr> errors(results.size());
  for (std::size_t start = 0; start < mt; start += threads) {
    const std::size_t stop = std::min(mt, start + threads);
    auto work = [&](std::size_t slot) {
      const std::size_t m = order[start + slot];
      try {
        auto res = mgsolve::pcg_solve(d.mg, fac.lambda_diag[m], d.load, spec.cg_tol);
        rep.iterations[m] = res.iterations;
        results[slot] = std::move(res.x);
      } catch (const NonConvergenceError& e) {
        errors[slot] = std::make_exception_ptr(NonConvergenceError(
            "shift Lambda_" + std::to_string(m) + " = " + std::to_string(fac.lambda_diag[m]) + ": " + e.what(),
            e.residual(), e.iterations()));
      } catch (...) {
        errors[slot] = std::current_exception();
      }
    };
    std::vector<std::thread> pool;
    for (std::size_t slot = 1; slot < stop - start; ++slot) pool.emplace_back(work, slot);
    work(0);
    for (auto& t : pool) t.join();
    for (std::size_t slot = 0; slot < stop - start; ++slot) {
      if (errors[slot]) std::rethrow_exception(errors[slot]);
      const double w2 = fac.weights[order[start + slot]] * fac.weights[order[start + slot]];
      const auto& x = results[slot];
      for (std::size_t i = 0; i < n; ++i) {
        const double y = w2 * x[i] - comp[i];
        const double t = u[i] + y;
        comp[i] = (t - u[i]) - y;
        u[i] = t;
      }
    }
  }
  rep.solve_ms = ms_since(t0);
  rep.mean_iterations =
      mt ? std::accumulate(rep.iterations.begin(), rep.iterations.end(), 0.0) / static_cast<double>(mt) : 0.0;

  sol.discrete_energy = dot(d.load, u);
  sol.trace_coefficients = std::move(u);
  sol.disc = std::move(disc);
  return sol;
}

double htrace_error_inner(const ProblemSpec& spec, const Solution& solution) {
  const auto load = fem::assemble_load(solution.disc->fine(), effective_rhs(spec), kErrorQuadOrder);
  return dot(load, solution.trace_coefficients);
}

}  // namespace fracpoisson::solver
