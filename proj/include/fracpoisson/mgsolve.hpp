#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "fracpoisson/fem.hpp"

namespace fracpoisson::mgsolve {

struct SmootherParams {
  double omega = 2.0 / 3.0;
  int pre = 2;
  int post = 2;
};

struct MgLevel {
  std::shared_ptr<const fem::SparseOperator> mass;
  std::shared_ptr<const fem::SparseOperator> stiffness;
  // coarse-to-this-level interpolation; null on the coarsest level
  std::shared_ptr<const fem::SparseOperator> prolongation;
};

class CoarseSolver;
class CoarseFactor;

// Per-call scratch for one shift; not shareable between threads.
struct Workspace {
  double sigma = 0.0;
  std::vector<std::vector<double>> rhs, sol, res, inv_diag;
  std::vector<fem::SparseOperator> op;  // sigma * M + S per level, empty on level 0
  std::shared_ptr<const CoarseFactor> coarse;
};

class MgHierarchy {
 public:
  static constexpr std::size_t kMaxCoarse = 2000;

  MgHierarchy(std::vector<MgLevel> levels, SmootherParams smoother = {});

  std::size_t num_levels() const noexcept { return levels_.size(); }
  std::size_t n() const { return levels_.back().mass->rows(); }
  const MgLevel& level(std::size_t l) const { return levels_.at(l); }
  const SmootherParams& smoother() const noexcept { return smoother_; }

  // The first `count` levels as a hierarchy of their own; shares the coarse cache.
  MgHierarchy prefix(std::size_t count) const;

  // z = B_sigma r, one symmetric V-cycle for sigma * M + S.
  void vcycle(double sigma, std::span<const double> r, std::span<double> z) const;
  void vcycle(double sigma, std::span<const double> r, std::span<double> z, Workspace& ws) const;

  Workspace make_workspace(double sigma) const;
  std::size_t cached_coarse_factorizations() const;

 private:
  void cycle(std::size_t l, Workspace& ws) const;

  std::vector<MgLevel> levels_;
  SmootherParams smoother_;
  std::shared_ptr<CoarseSolver> coarse_;
};

MgHierarchy build_mg(const std::vector<fem::FeSpace>& spaces, SmootherParams smoother = {});

struct PcgOptions {
  int max_iterations = 200;
  // called with (iteration, current iterate) after every update
  std::function<void(int, std::span<const double>)> observer;
};

struct PcgResult {
  std::vector<double> x;
  int iterations = 0;
  double relative_residual = 0.0;
};

PcgResult pcg_solve(const MgHierarchy& hier, double sigma, std::span<const double> rhs, double rel_tol = 1e-10,
                    const PcgOptions& options = {});

}  // namespace fracpoisson::mgsolve
