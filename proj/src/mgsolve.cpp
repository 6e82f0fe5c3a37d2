#include "fracpoisson/mgsolve.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <string>

#include "fracpoisson/errors.hpp"

namespace fracpoisson::mgsolve {

class CoarseFactor {
 public:
  explicit CoarseFactor(const Eigen::MatrixXd& a) : llt_(a) {
    if (llt_.info() != Eigen::Success) throw NumericalError("coarse-level Cholesky failed");
  }
  void solve(std::span<const double> b, std::span<double> x) const {
    Eigen::Map<const Eigen::VectorXd> bv(b.data(), static_cast<Eigen::Index>(b.size()));
    Eigen::Map<Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
    xv = llt_.solve(bv);
  }

 private:
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

class CoarseSolver {
 public:
  CoarseSolver(const fem::SparseOperator& mass, const fem::SparseOperator& stiffness)
      : mass_(dense(mass)), stiffness_(dense(stiffness)) {}

  std::shared_ptr<const CoarseFactor> get(double sigma) {
    std::lock_guard lock(mutex_);
    auto it = cache_.find(sigma);
    if (it != cache_.end()) return it->second;
    auto factor = std::make_shared<const CoarseFactor>(sigma * mass_ + stiffness_);
    cache_.emplace(sigma, factor);
    return factor;
  }

  std::size_t size() const {
    std::lock_guard lock(mutex_);
    return cache_.size();
  }

 private:
  static Eigen::MatrixXd dense(const fem::SparseOperator& op) {
    const auto n = static_cast<Eigen::Index>(op.rows());
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    const auto& p = op.pattern();
    for (std::size_t i = 0; i < p.rows; ++i) {
      for (std::size_t k = p.row_ptr[i]; k < p.row_ptr[i + 1]; ++k) {
        a(static_cast<Eigen::Index>(i), p.col[k]) = op.values()[k];
      }
    }
    return a;
  }

  Eigen::MatrixXd mass_;
  Eigen::MatrixXd stiffness_;
  mutable std::mutex mutex_;
  std::map<double, std::shared_ptr<const CoarseFactor>> cache_;
};

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

MgHierarchy::MgHierarchy(std::vector<MgLevel> levels, SmootherParams smoother)
    : levels_(std::move(levels)), smoother_(smoother) {
  if (levels_.empty()) throw ConfigurationError("multigrid hierarchy needs at least one level");
  for (std::size_t l = 0; l < levels_.size(); ++l) {
    const auto& lv = levels_[l];
    if (!lv.mass || !lv.stiffness) throw ConfigurationError("multigrid level without operators");
    const std::size_t n = lv.mass->rows();
    if (n == 0) throw ConfigurationError("multigrid level " + std::to_string(l) + " has no free unknowns");
    if (lv.mass->cols() != n || lv.stiffness->rows() != n || lv.stiffness->cols() != n) {
      throw ConfigurationError("multigrid level " + std::to_string(l) + ": operator sizes differ");
    }
    if (l == 0) continue;
    if (!lv.prolongation || lv.prolongation->rows() != n || lv.prolongation->cols() != levels_[l - 1].mass->rows()) {
      throw ConfigurationError("multigrid level " + std::to_string(l) + " is not nested in level " +
                               std::to_string(l - 1));
    }
  }
  if (levels_[0].mass->rows() > kMaxCoarse) {
    throw ConfigurationError("coarsest multigrid level has " + std::to_string(levels_[0].mass->rows()) +
                             " unknowns, more than the direct-solve limit " + std::to_string(kMaxCoarse));
  }
  if (smoother_.pre != smoother_.post || smoother_.pre < 0 || !(smoother_.omega > 0.0)) {
    throw ConfigurationError("smoother must be symmetric with positive damping");
  }
  coarse_ = std::make_shared<CoarseSolver>(*levels_[0].mass, *levels_[0].stiffness);
}

MgHierarchy MgHierarchy::prefix(std::size_t count) const {
  if (count == 0 || count > levels_.size()) throw ConfigurationError("invalid multigrid prefix length");
  MgHierarchy sub(*this);
  sub.levels_.resize(count);
  return sub;
}

Workspace MgHierarchy::make_workspace(double sigma) const {
  Workspace ws;
  ws.sigma = sigma;
  const std::size_t nl = levels_.size();
  ws.rhs.resize(nl);
  ws.sol.resize(nl);
  ws.res.resize(nl);
  ws.inv_diag.resize(nl);
  ws.op.resize(nl);
  for (std::size_t l = 0; l < nl; ++l) {
    const std::size_t n = levels_[l].mass->rows();
    ws.rhs[l].assign(n, 0.0);
    ws.sol[l].assign(n, 0.0);
    ws.res[l].assign(n, 0.0);
    if (l == 0) continue;
    ws.op[l] = fem::shifted_operator(*levels_[l].mass, *levels_[l].stiffness, sigma);
    const auto d = ws.op[l].diagonal();
    ws.inv_diag[l].resize(n);
    for (std::size_t i = 0; i < n; ++i) ws.inv_diag[l][i] = 1.0 / d[i];
  }
  ws.coarse = coarse_->get(sigma);
  return ws;
}

std::size_t MgHierarchy::cached_coarse_factorizations() const { return coarse_->size(); }

void MgHierarchy::cycle(std::size_t l, Workspace& ws) const {
  auto& b = ws.rhs[l];
  auto& x = ws.sol[l];
  if (l == 0) {
    ws.coarse->solve(b, x);
    return;
  }
  const auto& lv = levels_[l];
  const auto& a = ws.op[l];
  auto& r = ws.res[l];
  const auto& dinv = ws.inv_diag[l];
  const double w = smoother_.omega;
  const std::size_t n = b.size();
  auto smooth = [&]() {
    a.apply(x, r);
    for (std::size_t i = 0; i < n; ++i) x[i] += w * dinv[i] * (b[i] - r[i]);
  };
  if (smoother_.pre > 0) {
    for (std::size_t i = 0; i < n; ++i) x[i] = w * dinv[i] * b[i];
    for (int k = 1; k < smoother_.pre; ++k) smooth();
  } else {
    std::fill(x.begin(), x.end(), 0.0);
  }
  a.apply(x, r);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
  lv.prolongation->apply_transpose(r, ws.rhs[l - 1]);
  cycle(l - 1, ws);
  lv.prolongation->apply(ws.sol[l - 1], r);
  for (std::size_t i = 0; i < n; ++i) x[i] += r[i];
  for (int k = 0; k < smoother_.post; ++k) smooth();
}

void MgHierarchy::vcycle(double sigma, std::span<const double> r, std::span<double> z, Workspace& ws) const {
  if (ws.sigma != sigma || ws.rhs.size() != levels_.size()) ws = make_workspace(sigma);
  auto& top = ws.rhs.back();
  std::copy(r.begin(), r.end(), top.begin());
  cycle(levels_.size() - 1, ws);
  std::copy(ws.sol.back().begin(), ws.sol.back().end(), z.begin());
}

void MgHierarchy::vcycle(double sigma, std::span<const double> r, std::span<double> z) const {
  auto ws = make_workspace(sigma);
  vcycle(sigma, r, z, ws);
}

MgHierarchy build_mg(const std::vector<fem::FeSpace>& spaces, SmootherParams smoother) {
  std::vector<MgLevel> levels;
  const fem::FeSpace* previous = nullptr;
  for (const auto& space : spaces) {
    if (space.n() == 0) {
      if (!levels.empty()) throw ConfigurationError("empty space above the coarsest multigrid level");
      previous = &space;
      continue;
    }
    MgLevel lv;
    lv.mass = std::make_shared<const fem::SparseOperator>(fem::assemble_mass(space));
    lv.stiffness = std::make_shared<const fem::SparseOperator>(fem::assemble_stiffness(space));
    if (!levels.empty()) {
      lv.prolongation = std::make_shared<const fem::SparseOperator>(fem::build_prolongation(*previous, space));
    }
    levels.push_back(std::move(lv));
    previous = &space;
  }
  return MgHierarchy(std::move(levels), smoother);
}

PcgResult pcg_solve(const MgHierarchy& hier, double sigma, std::span<const double> rhs, double rel_tol,
                    const PcgOptions& options) {
  const std::size_t n = hier.n();
  if (rhs.size() != n) {
    throw ConfigurationError("pcg_solve: right-hand side has " + std::to_string(rhs.size()) +
                             " entries, expected " + std::to_string(n));
  }
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw DomainError("pcg_solve: shift must be finite and >= 0");
  PcgResult result;
  result.x.assign(n, 0.0);
  const double bnorm = std::sqrt(dot(rhs, rhs));
  if (bnorm == 0.0) return result;

  auto ws = hier.make_workspace(sigma);
  fem::SparseOperator single;
  if (hier.num_levels() == 1) single = fem::shifted_operator(*hier.level(0).mass, *hier.level(0).stiffness, sigma);
  const auto& fine_op = hier.num_levels() > 1 ? ws.op.back() : single;
  std::vector<double> r(rhs.begin(), rhs.end()), z(n), p(n), q(n);
  hier.vcycle(sigma, r, z, ws);
  p = z;
  double rz = dot(r, z);
  double rnorm = bnorm;
  for (int it = 1; it <= options.max_iterations; ++it) {
    fine_op.apply(p, q);
    const double alpha = rz / dot(p, q);
    for (std::size_t i = 0; i < n; ++i) {
      result.x[i] += alpha * p[i];
      r[i] -= alpha * q[i];
    }
    if (options.observer) options.observer(it, result.x);
    rnorm = std::sqrt(dot(r, r));
    if (rnorm <= rel_tol * bnorm) {
      result.iterations = it;
      result.relative_residual = rnorm / bnorm;
      return result;
    }
    hier.vcycle(sigma, r, z, ws);
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  throw NonConvergenceError("pcg_solve: no convergence within " + std::to_string(options.max_iterations) +
                                " iterations for shift " + std::to_string(sigma) + ", relative residual " +
                                std::to_string(rnorm / bnorm),
                            rnorm / bnorm, options.max_iterations);
}

}  // namespace fracpoisson::mgsolve
