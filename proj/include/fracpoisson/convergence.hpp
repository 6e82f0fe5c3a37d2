#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "fracpoisson/mesh.hpp"
#include "fracpoisson/spectrum.hpp"

namespace fracpoisson::convergence {

struct RunConfig {
  mesh::Domain domain = mesh::Domain::disc;
  double s = 0.25;
  double r = 2.0;
  int k = 1;
  int min_level = 2;
  int max_level = 6;
  double cg_tol = 1e-10;
  spectrum::Constants constants;
  int threads = 1;
};

void validate(const RunConfig& config);

struct SpectrumEntry {
  double lambda_hat = 0.0;
  std::size_t multiplicity = 0;
  int source_level = -1;  // -1 for Weyl values
};

struct LevelRow {
  int level = 0;
  double h = 0.0;
  std::size_t n = 0, M = 0, M_tilde = 0, N = 0;
  double h1alpha_error = 0.0;
  double fitted_rate = 0.0;  // NaN on the first row
  double mean_cg_iters = 0.0;
  double setup_ms = 0.0, eig_ms = 0.0, solve_ms = 0.0;

  bool clamped = false;
  std::size_t m0 = 0;
  int coarse_level = -1;
  int factor_digits = 0;
  std::vector<SpectrumEntry> spectrum;
  std::vector<double> weights;
};

struct RunResult {
  double energy = 0.0;
  std::vector<LevelRow> rows;
  std::string failure;  // empty iff every requested level finished

  bool ok() const { return failure.empty(); }
};

// Levels run in order on one hierarchy; `on_row` sees each row as soon as it is final.
RunResult run_convergence(const RunConfig& config, const std::function<void(const LevelRow&)>& on_row = {});

inline constexpr const char* kCsvHeader =
    "level,h,n,M,M_tilde,N,h1alpha_error,fitted_rate,mean_cg_iters,setup_ms,eig_ms,solve_ms";

// mask_timings writes zeros in the three timing columns so reruns compare byte for byte
void write_csv(std::ostream& out, const RunConfig& config, const RunResult& result, bool mask_timings = false);
void write_json(std::ostream& out, const RunConfig& config, const RunResult& result, bool mask_timings = false);

}  // namespace fracpoisson::convergence
