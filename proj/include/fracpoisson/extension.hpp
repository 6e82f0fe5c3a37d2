#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fracpoisson::extension {

struct FractionalParams {
  double s = 0.5;
  double r = 0.0;
  double alpha = 0.0;
  double d_s = 1.0;
  double c_s = 0.0;
  double kappa_s = 0.0;
};

// Throws DomainError unless s in (0,1) and r >= -s.
FractionalParams make_params(double s, double r);

// Relative energy loss when an eigenvalue is replaced by rho times itself.
double g_fn(double s, double rho);

// Row-major dense square matrix.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  explicit DenseMatrix(std::size_t n) : n_(n), a_(n * n, 0.0) {}
  std::size_t size() const noexcept { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }
  std::span<const double> data() const noexcept { return a_; }
  double frobenius() const;

 private:
  std::size_t n_ = 0;
  std::vector<double> a_;
};

DenseMatrix spectral_mass(std::span<const double> lambda_hat, const FractionalParams& p);
DenseMatrix spectral_stiffness(std::span<const double> lambda_hat, const FractionalParams& p);

struct SpectralFactorization {
  DenseMatrix m_sigma, s_sigma;
  DenseMatrix chol_l;             // M_sigma = L L^T
  DenseMatrix eigvecs;            // P, columns ordered like lambda_diag
  std::vector<double> lambda_diag;  // ascending
  std::vector<double> weights;      // w = P^T L^{-1} 1
  int digits = 0;                   // working precision that passed the conditioning guard
};

// Cholesky of M_sigma, cyclic Jacobi on L^{-1} S_sigma L^{-T}, weights. Carried out in
// extended precision (escalating 50..500 digits); throws IllConditionedError when even
// the widest tier cannot factor M_sigma reliably.
SpectralFactorization factorize(std::span<const double> lambda_hat, const FractionalParams& p);

// d_s * sum_m w_m^2 / (Lambda_m + lambda), the rational approximation of lambda^{-s}.
double rational(const SpectralFactorization& f, const FractionalParams& p, double lambda);

// c_s (sqrt(lambda) y)^s K_s(sqrt(lambda) y)
double psi_eval(double lambda_hat, const FractionalParams& p, double y);

}  // namespace fracpoisson::extension
