#include "fracpoisson/lobpcg.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "fracpoisson/errors.hpp"

namespace fracpoisson::lobpcg {

namespace {

using Mat = Eigen::MatrixXd;

class Operators {
 public:
  Operators(const fem::SparseOperator& s, const fem::SparseOperator& m) : s_(s), m_(m) {}
  Mat apply_s(const Mat& x) const { return apply(s_, x); }
  Mat apply_m(const Mat& x) const { return apply(m_, x); }

 private:
  static Mat apply(const fem::SparseOperator& a, const Mat& x) {
    Mat y(x.rows(), x.cols());
    const auto n = static_cast<std::size_t>(x.rows());
    for (Eigen::Index j = 0; j < x.cols(); ++j) a.apply({x.col(j).data(), n}, {y.col(j).data(), n});
    return y;
  }
  const fem::SparseOperator& s_;
  const fem::SparseOperator& m_;
};

Mat hcat(const std::vector<const Mat*>& blocks, Eigen::Index rows) {
  Eigen::Index cols = 0;
  for (const auto* b : blocks) cols += b->cols();
  Mat z(rows, cols);
  Eigen::Index at = 0;
  for (const auto* b : blocks) {
    z.middleCols(at, b->cols()) = *b;
    at += b->cols();
  }
  return z;
}

// Remove the span of the M-orthonormal Y from W in the M inner product (twice, for stability).
void deflate(const Mat& y, const Mat& my, Mat& w) {
  if (y.cols() == 0 || w.cols() == 0) return;
  for (int pass = 0; pass < 2; ++pass) w -= y * (my.transpose() * w);
}

// M-orthonormal basis of span(Z) via scaled Gram eigen-decomposition; drops near-dependent directions.
Mat svqb(const Mat& z, const Operators& ops) {
  Mat g = z.transpose() * ops.apply_m(z);
  g = (g + g.transpose()) / 2;
  Eigen::VectorXd d = g.diagonal().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
  const Mat scaled = d.asDiagonal() * g * d.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Mat> es(scaled);
  const auto& ev = es.eigenvalues();
  const double cut = 1e-12 * ev.maxCoeff();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (ev[i] > cut) keep.push_back(i);
  Mat t(z.cols(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    t.col(static_cast<Eigen::Index>(k)) = es.eigenvectors().col(keep[k]) / std::sqrt(ev[keep[k]]);
  }
  return z * (d.asDiagonal() * t);
}

Mat random_block(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Mat x(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) x(i, j) = u(rng);
  return x;
}

}  // namespace

EigenPairs solve(const fem::SparseOperator& stiffness, const fem::SparseOperator& mass,
                 const mgsolve::MgHierarchy& precond, std::size_t count, const Options& options) {
  const std::size_t n = stiffness.rows();
  if (mass.rows() != n || precond.n() != n) throw ConfigurationError("lobpcg: operator sizes differ");
  if (count == 0) return {};
  if (2 * count > n) {
    throw ConfigurationError("lobpcg: " + std::to_string(count) + " eigenpairs requested from a problem of size " +
                             std::to_string(n) + "; need count < n/2");
  }
  const auto rows = static_cast<Eigen::Index>(n);
  std::size_t b = options.block_size ? options.block_size : std::min<std::size_t>(count + 10, 40);
  b = std::min(b, n - count);
  const Operators ops(stiffness, mass);
  std::mt19937_64 rng(options.seed);
  auto ws = precond.make_workspace(0.0);

  Mat y(rows, 0), my(rows, 0);
  Mat x = svqb(random_block(rows, static_cast<Eigen::Index>(b), rng), ops);
  Mat p(rows, 0);
  int it = 0;
  double worst = 0.0;

  while (true) {
    // Rayleigh-Ritz within the current block keeps X sorted and M-orthonormal.
    Mat sx = ops.apply_s(x);
    {
      Mat a = x.transpose() * sx;
      Eigen::SelfAdjointEigenSolver<Mat> es((a + a.transpose()) / 2);
      x = x * es.eigenvectors();
      sx = sx * es.eigenvectors();
    }
    Mat mx = ops.apply_m(x);
    const Eigen::VectorXd theta = (x.transpose() * sx).diagonal();
    Mat r = sx - mx * theta.asDiagonal();

    Eigen::Index lock = 0;
    while (lock < x.cols() && y.cols() + lock < static_cast<Eigen::Index>(count) &&
           r.col(lock).norm() <= options.tol * std::abs(theta[lock])) {
      ++lock;
    }
    if (lock > 0) {
      y.conservativeResize(Eigen::NoChange, y.cols() + lock);
      my.conservativeResize(Eigen::NoChange, my.cols() + lock);
      y.rightCols(lock) = x.leftCols(lock);
      my.rightCols(lock) = mx.leftCols(lock);
      x = Mat(x.rightCols(x.cols() - lock));
      mx = Mat(mx.rightCols(mx.cols() - lock));
      r = Mat(r.rightCols(r.cols() - lock));
    }
    if (y.cols() >= static_cast<Eigen::Index>(count)) break;

    worst = 0.0;
    for (Eigen::Index j = 0; j < std::min<Eigen::Index>(r.cols(), static_cast<Eigen::Index>(count) - y.cols()); ++j) {
      worst = std::max(worst, r.col(j).norm() / std::abs(theta[lock + j]));
    }
    if (++it > options.max_iterations) {
      throw NumericalError("lobpcg: " + std::to_string(y.cols()) + " of " + std::to_string(count) +
                           " eigenpairs converged in " + std::to_string(options.max_iterations) +
                           " iterations; worst relative residual " + std::to_string(worst));
    }

    Mat w(rows, r.cols() + lock);
    for (Eigen::Index j = 0; j < r.cols(); ++j) {
      precond.vcycle(0.0, {r.col(j).data(), n}, {w.col(j).data(), n}, ws);
    }
    if (lock > 0) w.rightCols(lock) = random_block(rows, lock, rng);
    deflate(y, my, w);
    deflate(y, my, p);
    deflate(y, my, x);

    const Mat q = svqb(hcat({&x, &w, &p}, rows), ops);
    Mat a = q.transpose() * ops.apply_s(q);
    Eigen::SelfAdjointEigenSolver<Mat> es((a + a.transpose()) / 2);
    const Eigen::Index keep = std::min<Eigen::Index>(static_cast<Eigen::Index>(b), q.cols());
    Mat x_new = q * es.eigenvectors().leftCols(keep);
    p = x_new - x * (mx.transpose() * x_new);
    x = std::move(x_new);
  }

  // Final Rayleigh-Ritz over the locked space.
  Mat sy = ops.apply_s(y);
  Mat a = y.transpose() * sy;
  Eigen::SelfAdjointEigenSolver<Mat> es((a + a.transpose()) / 2);
  y = y * es.eigenvectors();
  sy = sy * es.eigenvectors();
  const Mat my_final = ops.apply_m(y);

  EigenPairs out;
  out.iterations = it;
  for (std::size_t k = 0; k < count; ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    const double lam = es.eigenvalues()[kk];
    out.values.push_back(lam);
    out.vectors.emplace_back(y.col(kk).data(), y.col(kk).data() + n);
    out.residuals.push_back((sy.col(kk) - lam * my_final.col(kk)).norm());
  }
  return out;
}

}  // namespace fracpoisson::lobpcg
