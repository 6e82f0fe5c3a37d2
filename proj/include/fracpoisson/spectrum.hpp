#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "fracpoisson/extension.hpp"
#include "fracpoisson/lobpcg.hpp"
#include "fracpoisson/mgsolve.hpp"

namespace fracpoisson::spectrum {

// level >= 0: FEM eigenvalue computed on that mesh level; level == -1: Weyl estimate
struct Provenance {
  int level = -1;
  bool is_weyl() const noexcept { return level < 0; }
};

struct SpectrumApprox {
  std::vector<double> values;  // strictly increasing
  std::vector<Provenance> provenance;
  std::vector<std::size_t> multiplicity;
  std::size_t M = 0;
  // merged candidate list before decimation and the value each candidate was mapped to
  std::vector<double> candidates;
  std::vector<Provenance> candidate_provenance;
  std::vector<std::size_t> assignment;

  std::size_t size() const noexcept { return values.size(); }
};

struct Constants {
  double c_m = 16.0;
  double c_cross = 1.0;
  double c_h = 1.0;
};

double weyl_constant(int d);
double weyl_eigenvalue(std::size_t m, int d, double domain_measure);

std::size_t choose_M(double h, int k, double r, double s, int d, double domain_measure, double c_m = 1.0);
std::size_t crossover_m0(double h, int k, double r, double s, int d, double c_cross = 1.0);

// Upper bound on the coarse mesh size H for the FEM eigenvalues.
double coarse_h_bound(double h, int k, double r, double s, double c_h = 1.0);

struct LevelInfo {
  int level;
  double h;
  std::size_t n;
};

struct CoarseChoice {
  std::size_t index;  // position in the level list
  std::size_t m0;     // possibly clamped
};

// Coarsest listed level meeting the H bound with n > 2 m0; falls back to the
// finest-but-one, then the finest, clamping m0 below n/2 if nothing else fits.
CoarseChoice select_coarse_level(std::span<const LevelInfo> levels, double h, int k, double r, double s,
                                 std::size_t m0, double c_h = 1.0);

lobpcg::EigenPairs coarse_fem_eigs(const mgsolve::MgHierarchy& mg, std::size_t count,
                                   const lobpcg::Options& options = {});

SpectrumApprox decimate(std::span<const double> candidates, std::span<const Provenance> provenance,
                        const extension::FractionalParams& params, double h, int k, int d, double domain_measure);

// FEM values for indices below m0, Weyl above, re-sorted.
void merge_candidates(std::span<const double> fem_values, int fem_level, std::size_t M, int d,
                      double domain_measure, std::vector<double>& values, std::vector<Provenance>& provenance);

struct PipelineInput {
  const mgsolve::MgHierarchy* mg = nullptr;  // finest level = computational level
  std::vector<LevelInfo> levels;             // one entry per mg level, coarse to fine
  extension::FractionalParams params;
  int k = 1;
  int d = 2;
  double domain_measure = 1.0;
  Constants constants;
};

struct PipelineResult {
  SpectrumApprox approx;
  std::size_t m0 = 0;
  int coarse_level = -1;
  int eig_iterations = 0;
  double max_residual = 0.0;
};

PipelineResult build_spectrum(const PipelineInput& in);

// index,lambda_tilde,source,level,lambda_hat
void write_csv(const SpectrumApprox& sp, std::ostream& out);

}  // namespace fracpoisson::spectrum
