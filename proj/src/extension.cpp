#include "fracpoisson/extension.hpp"

#include <algorithm>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>

#include "fracpoisson/errors.hpp"
#include "fracpoisson/special.hpp"

namespace fracpoisson::extension {

namespace mp = boost::multiprecision;

FractionalParams make_params(double s, double r) {
  if (!(s > 0.0 && s < 1.0)) throw DomainError("fractional order s must lie in (0,1), got " + std::to_string(s));
  if (!std::isfinite(r) || r < -s) throw DomainError("regularity index r must satisfy r >= -s");
  FractionalParams p;
  p.s = s;
  p.r = r;
  p.alpha = 1.0 - 2.0 * s;
  p.d_s = s == 0.5 ? 1.0 : std::pow(2.0, 1.0 - 2.0 * s) * special::gamma(1.0 - s) / special::gamma(s);
  p.c_s = std::pow(2.0, 1.0 - s) / special::gamma(s);
  p.kappa_s = std::sqrt(2.0 / (std::numbers::e * s * (1.0 - s)));
  return p;
}

double g_fn(double s, double rho) {
  if (!(s > 0.0 && s < 1.0)) throw DomainError("g: s must lie in (0,1)");
  if (!(rho > 0.0) || !std::isfinite(rho)) throw DomainError("g: rho must be positive and finite");
  const double denom = (1.0 - s) * std::pow(rho, s) + s * std::pow(rho, s - 1.0);
  return std::max(0.0, 1.0 - 1.0 / denom);
}

double DenseMatrix::frobenius() const {
  double sum = 0.0;
  for (double v : a_) sum += v * v;
  return std::sqrt(sum);
}

namespace {

template <class Real>
struct Square {
  std::size_t n;
  std::vector<Real> a;
  explicit Square(std::size_t n_) : n(n_), a(n_ * n_, Real(0)) {}
  Real& operator()(std::size_t i, std::size_t j) { return a[i * n + j]; }
  const Real& operator()(std::size_t i, std::size_t j) const { return a[i * n + j]; }
};

void check_spectrum(std::span<const double> lambda) {
  if (lambda.empty()) throw PreconditionError("spectral matrices need at least one eigenvalue");
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    if (!(lambda[i] > 0.0) || !std::isfinite(lambda[i])) {
      throw PreconditionError("spectral eigenvalues must be positive and finite");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (lambda[i] == lambda[j]) {
        throw PreconditionError("spectral eigenvalues must be distinct (index " + std::to_string(j) + " and " +
                                std::to_string(i) + ")");
      }
    }
  }
}

// Unit-d_s mass and stiffness in precision Real.
template <class Real>
std::pair<Square<Real>, Square<Real>> unit_matrices(std::span<const double> lambda, double s_value) {
  using std::abs;
  using std::pow;
  using mp::abs;
  using mp::pow;
  const std::size_t n = lambda.size();
  const Real s(s_value);
  const Real one(1);
  const Real taylor = pow(Real(std::numeric_limits<Real>::epsilon()), Real(0.25));
  std::vector<Real> x(n), xs(n), xs1(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = Real(lambda[i]);
    xs[i] = pow(x[i], s);
    xs1[i] = xs[i] / x[i];
  }
  Square<Real> m(n), k(n);
  for (std::size_t i = 0; i < n; ++i) {
    m(i, i) = s * xs1[i];
    k(i, i) = (one - s) * xs[i];
    for (std::size_t j = 0; j < i; ++j) {
      const Real diff = x[i] - x[j];
      Real mij, kij;
      if (abs(diff) < taylor * std::max(x[i], x[j])) {
        const Real c = (x[i] + x[j]) / 2;
        const Real d2 = diff * diff / 4;
        const Real cs3 = pow(c, s - 3);
        mij = s * cs3 * c * c + s * (s - 1) * (s - 2) / 6 * cs3 * d2;
        const Real cs4 = cs3 / c;
        kij = -(c * c - d2) * ((s - 1) * cs4 * c * c + (s - 1) * (s - 2) * (s - 3) * cs4 * d2 / 6);
      } else {
        mij = (xs[i] - xs[j]) / diff;
        kij = (x[i] * xs[j] - x[j] * xs[i]) / diff;
      }
      m(i, j) = m(j, i) = mij;
      k(i, j) = k(j, i) = kij;
    }
  }
  return {std::move(m), std::move(k)};
}

template <class Real>
struct Factored {
  Square<Real> l;
  Square<Real> p;
  std::vector<Real> lambda;
  std::vector<Real> w;
};

// Returns nullopt if the pivots lose more than digits - 20 decimal digits.
template <class Real>
std::optional<Factored<Real>> factor_in(std::span<const double> lambda, double s, int digits) {
  using std::sqrt;
  using std::abs;
  using mp::sqrt;
  using mp::abs;
  const std::size_t n = lambda.size();
  auto [mm, kk] = unit_matrices<Real>(lambda, s);
  const Real limit = mp::pow(Real(10), digits - 20);

  Square<Real> l(n);
  for (std::size_t j = 0; j < n; ++j) {
    Real d = mm(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0) || mm(j, j) / d > limit) return std::nullopt;
    l(j, j) = sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      Real v = mm(i, j);
      for (std::size_t k = 0; k < j; ++k) v -= l(i, k) * l(j, k);
      l(i, j) = v / l(j, j);
    }
  }

  // C = L^{-1} K L^{-T}, built column by column with two forward solves.
  auto forward = [&](std::vector<Real>& v) {
    for (std::size_t i = 0; i < n; ++i) {
      Real t = v[i];
      for (std::size_t k = 0; k < i; ++k) t -= l(i, k) * v[k];
      v[i] = t / l(i, i);
    }
  };
  Square<Real> x(n);
  std::vector<Real> col(n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) col[i] = kk(i, j);
    forward(col);
    for (std::size_t i = 0; i < n; ++i) x(j, i) = col[i];  // row j of X^T = column j of L^{-1}K
  }
  Square<Real> c(n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) col[i] = x(i, j);
    forward(col);
    for (std::size_t i = 0; i < n; ++i) c(i, j) = col[i];
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) c(i, j) = c(j, i) = (c(i, j) + c(j, i)) / 2;
  }

  Square<Real> p(n);
  for (std::size_t i = 0; i < n; ++i) p(i, i) = 1;
  Real frob(0);
  for (const auto& v : c.a) frob += v * v;
  frob = sqrt(frob);
  const Real tol = mp::pow(Real(10), -(digits - 10)) * frob;
  auto off_norm = [&]() {
    Real off(0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < i; ++j) off += 2 * c(i, j) * c(i, j);
    return sqrt(off);
  };
  int sweep = 0;
  while (off_norm() > tol) {
    if (++sweep > 100) throw NumericalError("Jacobi eigensolver did not converge in 100 sweeps");
    for (std::size_t a = 0; a + 1 < n; ++a) {
      for (std::size_t b = a + 1; b < n; ++b) {
        if (c(a, b) == 0) continue;
        const Real theta = (c(b, b) - c(a, a)) / (2 * c(a, b));
        const Real t = (theta >= 0 ? Real(1) : Real(-1)) / (abs(theta) + sqrt(theta * theta + 1));
        const Real cs = 1 / sqrt(t * t + 1);
        const Real sn = t * cs;
        for (std::size_t k = 0; k < n; ++k) {
          const Real ca = c(k, a), cb = c(k, b);
          c(k, a) = cs * ca - sn * cb;
          c(k, b) = sn * ca + cs * cb;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const Real ca = c(a, k), cb = c(b, k);
          c(a, k) = cs * ca - sn * cb;
          c(b, k) = sn * ca + cs * cb;
        }
        c(a, b) = c(b, a) = 0;
        for (std::size_t k = 0; k < n; ++k) {
          const Real pa = p(k, a), pb = p(k, b);
          p(k, a) = cs * pa - sn * pb;
          p(k, b) = sn * pa + cs * pb;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return c(i, i) < c(j, j); });

  std::vector<Real> y(n, Real(1));
  forward(y);
  Factored<Real> out{std::move(l), Square<Real>(n), std::vector<Real>(n), std::vector<Real>(n)};
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t src = order[k];
    out.lambda[k] = c(src, src);
    Real wk(0);
    for (std::size_t i = 0; i < n; ++i) {
      out.p(i, k) = p(i, src);
      wk += p(i, src) * y[i];
    }
    out.w[k] = wk;
  }
  return out;
}

template <class Real>
bool try_tier(std::span<const double> lambda, const FractionalParams& prm, int digits, SpectralFactorization& f) {
  auto res = factor_in<Real>(lambda, prm.s, digits);
  if (!res) return false;
  const std::size_t n = lambda.size();
  const double root = std::sqrt(prm.d_s);
  f.chol_l = DenseMatrix(n);
  f.eigvecs = DenseMatrix(n);
  f.lambda_diag.resize(n);
  f.weights.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      f.chol_l(i, j) = static_cast<double>(res->l(i, j)) * root;
      f.eigvecs(i, j) = static_cast<double>(res->p(i, j));
    }
    f.lambda_diag[i] = static_cast<double>(res->lambda[i]);
    f.weights[i] = static_cast<double>(res->w[i]) / root;
  }
  f.digits = digits;
  return true;
}

DenseMatrix to_dense(const Square<double>& a, double scale) {
  DenseMatrix out(a.n);
  for (std::size_t i = 0; i < a.n; ++i)
    for (std::size_t j = 0; j < a.n; ++j) out(i, j) = a(i, j) * scale;
  return out;
}

using Float50 = mp::number<mp::cpp_bin_float<50>, mp::et_off>;
using Float100 = mp::number<mp::cpp_bin_float<100>, mp::et_off>;
using Float250 = mp::number<mp::cpp_bin_float<250>, mp::et_off>;
using Float500 = mp::number<mp::cpp_bin_float<500>, mp::et_off>;

}  // namespace

DenseMatrix spectral_mass(std::span<const double> lambda_hat, const FractionalParams& p) {
  check_spectrum(lambda_hat);
  return to_dense(unit_matrices<double>(lambda_hat, p.s).first, p.d_s);
}

DenseMatrix spectral_stiffness(std::span<const double> lambda_hat, const FractionalParams& p) {
  check_spectrum(lambda_hat);
  return to_dense(unit_matrices<double>(lambda_hat, p.s).second, p.d_s);
}

SpectralFactorization factorize(std::span<const double> lambda_hat, const FractionalParams& p) {
  check_spectrum(lambda_hat);
  SpectralFactorization f;
  auto [m, k] = unit_matrices<double>(lambda_hat, p.s);
  f.m_sigma = to_dense(m, p.d_s);
  f.s_sigma = to_dense(k, p.d_s);
  if (try_tier<Float50>(lambda_hat, p, 50, f) || try_tier<Float100>(lambda_hat, p, 100, f) ||
      try_tier<Float250>(lambda_hat, p, 250, f) || try_tier<Float500>(lambda_hat, p, 500, f)) {
    return f;
  }
  throw IllConditionedError("spectral mass matrix of size " + std::to_string(lambda_hat.size()) +
                            " is too ill-conditioned to factor even with 500 digits; "
                            "increase the decimation threshold to separate the eigenvalues further");
}

double rational(const SpectralFactorization& f, const FractionalParams& p, double lambda) {
  double sum = 0.0, comp = 0.0;
  for (std::size_t m = 0; m < f.weights.size(); ++m) {
    const double term = f.weights[m] * f.weights[m] / (f.lambda_diag[m] + lambda) - comp;
    const double t = sum + term;
    comp = (t - sum) - term;
    sum = t;
  }
  return p.d_s * sum;
}

double psi_eval(double lambda_hat, const FractionalParams& p, double y) {
  if (!(lambda_hat > 0.0)) throw DomainError("psi: eigenvalue must be positive");
  if (!(y > 0.0)) throw DomainError("psi: y must be positive");
  const double x = std::sqrt(lambda_hat) * y;
  if (x > 700.0) return 0.0;
  return p.c_s * std::pow(x, p.s) * special::bessel_k(p.s, x);
}

}  // namespace fracpoisson::extension
