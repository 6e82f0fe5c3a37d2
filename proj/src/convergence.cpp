#include "fracpoisson/convergence.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "fracpoisson/errors.hpp"
#include "fracpoisson/extension.hpp"
#include "fracpoisson/solver.hpp"
#include "fracpoisson/verify.hpp"
#include "json.hpp"

namespace fracpoisson::convergence {

namespace {

std::string num(double x) {
  if (!std::isfinite(x)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

nlohmann::json maybe(double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); }

}  // namespace

void validate(const RunConfig& c) {
  if (!(c.s > 0.0 && c.s < 1.0)) throw ConfigurationError("s must lie in (0, 1)");
  if (c.k != 1 && c.k != 2) throw ConfigurationError("order must be 1 or 2");
  if (c.k == 2 && mesh::dimension(c.domain) == 3) throw ConfigurationError("order 2 is not supported on the cube");
  if (c.min_level < 0 || c.min_level > c.max_level) throw ConfigurationError("need 0 <= min_level <= max_level");
  if (!(c.cg_tol > 0.0)) throw ConfigurationError("cg tolerance must be positive");
  if (!(c.constants.c_m > 0.0 && c.constants.c_cross > 0.0 && c.constants.c_h > 0.0))
    throw ConfigurationError("constants must be positive");
  if (c.threads < 1) throw ConfigurationError("thread count must be at least 1");
}

RunResult run_convergence(const RunConfig& config, const std::function<void(const LevelRow&)>& on_row) {
  validate(config);
  RunResult result;
  solver::ProblemSpec spec;
  spec.domain = config.domain;
  spec.params = extension::make_params(config.s, config.r);
  spec.k = config.k;
  spec.cg_tol = config.cg_tol;
  spec.constants = config.constants;
  spec.threads = config.threads;
  try {
    solver::effective_rhs(spec);
    const auto energy = verify::energy(config.domain, spec.params);
    result.energy = energy.value;
    mesh::MeshHierarchy hierarchy(config.domain);
    for (int level = config.min_level; level <= config.max_level; ++level) {
      spec.level = level;
      const auto sol = solver::solve(spec, hierarchy);
      const auto err = verify::h1alpha_error(spec, sol, energy);
      const auto& rep = sol.report;
      LevelRow row;
      row.level = level;
      row.h = hierarchy.h(level);
      row.n = rep.n;
      row.M = rep.M;
      row.M_tilde = rep.M_tilde;
      row.N = rep.N;
      row.h1alpha_error = err.error;
      row.clamped = err.clamped;
      row.fitted_rate = std::numeric_limits<double>::quiet_NaN();
      if (!result.rows.empty()) {
        const auto& prev = result.rows.back();
        row.fitted_rate = std::log(prev.h1alpha_error / row.h1alpha_error) / std::log(prev.h / row.h);
      }
      row.mean_cg_iters = rep.mean_iterations;
      row.setup_ms = rep.setup_ms;
      row.eig_ms = rep.eig_ms;
      row.solve_ms = rep.solve_ms;
      row.m0 = rep.m0;
      row.coarse_level = rep.coarse_level;
      row.factor_digits = rep.factor_digits;
      const auto& approx = sol.disc->spectrum.approx;
      for (std::size_t i = 0; i < approx.values.size(); ++i)
        row.spectrum.push_back({approx.values[i], approx.multiplicity[i], approx.provenance[i].level});
      row.weights = sol.disc->factor.weights;
      result.rows.push_back(std::move(row));
      if (on_row) on_row(result.rows.back());
    }
  } catch (const std::exception& e) {
    result.failure = e.what();
  }
  return result;
}

void write_csv(std::ostream& out, const RunConfig& c, const RunResult& result, bool mask_timings) {
  out << "# domain=" << mesh::to_string(c.domain) << "\n"
      << "# dim=" << mesh::dimension(c.domain) << "\n"
      << "# s=" << num(c.s) << "\n"
      << "# r=" << num(c.r) << "\n"
      << "# k=" << c.k << "\n"
      << "# cg_tol=" << num(c.cg_tol) << "\n"
      << "# c_m=" << num(c.constants.c_m) << "\n"
      << "# c_cross=" << num(c.constants.c_cross) << "\n"
      << "# c_h=" << num(c.constants.c_h) << "\n"
      << "# energy=" << num(result.energy) << "\n";
  if (!result.ok()) out << "# failure=" << result.failure << "\n";
  out << kCsvHeader << "\n";
  for (const auto& row : result.rows) {
    out << row.level << ',' << num(row.h) << ',' << row.n << ',' << row.M << ',' << row.M_tilde << ',' << row.N << ','
        << num(row.h1alpha_error) << ',' << num(row.fitted_rate) << ',' << num(row.mean_cg_iters) << ','
        << num(mask_timings ? 0.0 : row.setup_ms) << ',' << num(mask_timings ? 0.0 : row.eig_ms) << ','
        << num(mask_timings ? 0.0 : row.solve_ms) << "\n";
  }
}

void write_json(std::ostream& out, const RunConfig& c, const RunResult& result, bool mask_timings) {
  nlohmann::json doc;
  doc["config"] = {{"domain", mesh::to_string(c.domain)},
                   {"dim", mesh::dimension(c.domain)},
                   {"s", c.s},
                   {"r", c.r},
                   {"k", c.k},
                   {"min_level", c.min_level},
                   {"max_level", c.max_level},
                   {"cg_tol", c.cg_tol},
                   {"c_m", c.constants.c_m},
                   {"c_cross", c.constants.c_cross},
                   {"c_h", c.constants.c_h},
                   {"threads", c.threads}};
  doc["energy"] = result.energy;
  doc["ok"] = result.ok();
  if (!result.ok()) doc["failure"] = result.failure;
  auto rows = nlohmann::json::array();
  for (const auto& row : result.rows) {
    nlohmann::json j;
    j["level"] = row.level;
    j["h"] = row.h;
    j["n"] = row.n;
    j["M"] = row.M;
    j["M_tilde"] = row.M_tilde;
    j["N"] = row.N;
    j["h1alpha_error"] = row.h1alpha_error;
    j["fitted_rate"] = maybe(row.fitted_rate);
    j["mean_cg_iters"] = row.mean_cg_iters;
    j["setup_ms"] = mask_timings ? 0.0 : row.setup_ms;
    j["eig_ms"] = mask_timings ? 0.0 : row.eig_ms;
    j["solve_ms"] = mask_timings ? 0.0 : row.solve_ms;
    auto spec = nlohmann::json::array();
    for (const auto& e : row.spectrum) {
      spec.push_back({{"lambda_hat", e.lambda_hat},
                      {"multiplicity", e.multiplicity},
                      {"source", e.source_level < 0 ? "weyl" : "fem"},
                      {"level", e.source_level}});
    }
    j["spectrum"] = {{"m0", row.m0},
                     {"coarse_level", row.coarse_level},
                     {"factor_digits", row.factor_digits},
                     {"clamped", row.clamped},
                     {"values", spec},
                     {"weights", row.weights}};
    rows.push_back(std::move(j));
  }
  doc["rows"] = std::move(rows);
  out << doc.dump(2) << "\n";
}

}  // namespace fracpoisson::convergence
