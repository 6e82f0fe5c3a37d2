#include "fracpoisson/special.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "fracpoisson/errors.hpp"

namespace fracpoisson::special {

namespace {

constexpr double kSeriesTol = 1e-17;
constexpr double kPi = std::numbers::pi;

double hankel_threshold(double nu) { return std::max(25.0, nu * nu); }

}  // namespace

double gamma(double x) {
  if (!std::isfinite(x) || x <= 0.0) {
    throw DomainError("gamma: argument must be positive and finite, got " + std::to_string(x));
  }
  return std::tgamma(x);
}

namespace detail {

double bessel_j_series(double nu, double x) {
  const double q = -0.25 * x * x;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 500; ++k) {
    term *= q / (k * (k + nu));
    sum += term;
    if (std::abs(term) < kSeriesTol * std::abs(sum)) break;
  }
  return sum * std::pow(0.5 * x, nu) / std::tgamma(nu + 1.0);
}

// Backward recurrence from a high order, normalized with the Neumann sum
// (x/2)^mu = sum_j (mu+2j) Gamma(mu+j)/j! J_{mu+2j}(x).
double bessel_j_miller(double nu, double x) {
  const int n = static_cast<int>(std::floor(nu));
  const double mu = nu - n;
  int top = n + static_cast<int>(std::ceil(x + 20.0 * std::cbrt(x))) + 40;
  if (top % 2) ++top;
  std::vector<double> f(static_cast<std::size_t>(top) + 2, 0.0);
  f[top] = 1e-30;
  for (int k = top; k >= 1; --k) {
    f[k - 1] = 2.0 * (mu + k) / x * f[k] - f[k + 1];
    if (std::abs(f[k - 1]) > 1e250) {
      for (int j = k - 1; j <= top; ++j) f[j] *= 1e-250;
    }
  }
  double norm = std::tgamma(mu + 1.0) * f[0];
  double g = std::tgamma(mu + 1.0);  // Gamma(mu+j)/j! at j = 1
  for (int j = 1; 2 * j <= top; ++j) {
    norm += (mu + 2.0 * j) * g * f[2 * j];
    g *= (mu + j) / (j + 1.0);
  }
  return f[n] * std::pow(0.5 * x, mu) / norm;
}

double bessel_j_hankel(double nu, double x) {
  const double four_nu2 = 4.0 * nu * nu;
  double p = 1.0;
  double q = 0.0;
  double term = 1.0;
  double prev = INFINITY;
  for (int k = 1; k < 200; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= (four_nu2 - odd * odd) / (k * 8.0 * x);
    const double mag = std::abs(term);
    if (mag > prev) break;
    prev = mag;
    // a_k/x^k enters P with sign (-1)^{k/2} for even k, Q with (-1)^{(k-1)/2} for odd k
    const int phase = k % 4;
    if (phase == 0) p += term;
    else if (phase == 1) q += term;
    else if (phase == 2) p -= term;
    else q -= term;
    if (mag < kSeriesTol) break;
  }
  // cos/sin of x - phase expanded so that x itself is reduced exactly by libm
  const double phase = (0.5 * nu + 0.25) * kPi;
  const double cx = std::cos(x), sx = std::sin(x);
  const double cp = std::cos(phase), sp = std::sin(phase);
  const double cos_chi = cx * cp + sx * sp;
  const double sin_chi = sx * cp - cx * sp;
  return std::sqrt(2.0 / (kPi * x)) * (p * cos_chi - q * sin_chi);
}

double bessel_k_connection(double nu, double x) {
  const double q = 0.25 * x * x;
  auto bessel_i = [&](double order) {
    double term = 1.0 / std::tgamma(order + 1.0);
    double sum = term;
    for (int k = 1; k < 500; ++k) {
      term *= q / (k * (k + order));
      sum += term;
      if (std::abs(term) < kSeriesTol * std::abs(sum)) break;
    }
    return sum * std::pow(0.5 * x, order);
  };
  return kPi * (bessel_i(-nu) - bessel_i(nu)) / (2.0 * std::sin(nu * kPi));
}

// Steed's continued fraction CF2 with Temme's normalization.
double bessel_k_steed(double nu, double x) {
  const double a1 = 0.25 - nu * nu;
  double b = 2.0 * (1.0 + x);
  double d = 1.0 / b;
  double delh = d;
  double h = d;
  double q1 = 0.0;
  double q2 = 1.0;
  double q = a1;
  double c = a1;
  double a = -a1;
  double s = 1.0 + q * delh;
  for (int i = 2; i < 100000; ++i) {
    a -= 2.0 * (i - 1);
    c = -a * c / i;
    const double qnew = (q1 - b * q2) / a;
    q1 = q2;
    q2 = qnew;
    q += c * qnew;
    b += 2.0;
    d = 1.0 / (b + a * d);
    delh = (b * d - 1.0) * delh;
    h += delh;
    const double dels = q * delh;
    s += dels;
    if (std::abs(dels / s) < 1e-17) break;
  }
  return std::sqrt(kPi / (2.0 * x)) * std::exp(-x) / s;
}

}  // namespace detail

double bessel_j(double nu, double x) {
  if (!std::isfinite(nu) || !std::isfinite(x) || nu < 0.0 || nu > 10.0 || x < 0.0 || x > 1e5) {
    throw DomainError("bessel_j: need nu in [0,10] and x in [0,1e5], got nu=" + std::to_string(nu) +
                      " x=" + std::to_string(x));
  }
  if (x == 0.0) return nu == 0.0 ? 1.0 : 0.0;
  if (x <= 4.0) return detail::bessel_j_series(nu, x);
  if (x >= hankel_threshold(nu)) return detail::bessel_j_hankel(nu, x);
  return detail::bessel_j_miller(nu, x);
}

double bessel_k(double nu, double x) {
  if (!std::isfinite(nu) || nu <= 0.0 || nu >= 1.0) {
    throw DomainError("bessel_k: order must lie in (0,1), got " + std::to_string(nu));
  }
  if (!std::isfinite(x) || x <= 0.0) {
    throw DomainError("bessel_k: argument must be positive, got " + std::to_string(x));
  }
  if (x <= 2.0) return detail::bessel_k_connection(nu, x);
  if (x > 745.0) return 0.0;
  return detail::bessel_k_steed(nu, x);
}

BesselZeroTable bessel_j0_zeros(std::size_t count) {
  if (count == 0) throw DomainError("bessel_j0_zeros: count must be positive");
  BesselZeroTable table;
  table.zeros.reserve(count);
  for (std::size_t k = 1; k <= count; ++k) {
    const double beta = (static_cast<double>(k) - 0.25) * kPi;
    const double b8 = 8.0 * beta;
    double z = beta + 1.0 / b8 - 124.0 / (3.0 * b8 * b8 * b8) +
               120928.0 / (15.0 * b8 * b8 * b8 * b8 * b8);
    bool converged = false;
    double last = INFINITY;
    for (int it = 0; it < 50; ++it) {
      const double step = bessel_j(0.0, z) / bessel_j(1.0, z);
      z += step;
      // roundoff floor: the step stops shrinking once it is at the noise level of J0
      if (std::abs(step) <= 1e-15 * z || (std::abs(step) <= 1e-13 * z && std::abs(step) >= last)) {
        converged = true;
        break;
      }
      last = std::abs(step);
    }
    if (!converged) {
      throw NumericalError("bessel_j0_zeros: Newton did not converge for zero " + std::to_string(k));
    }
    table.zeros.push_back(z);
  }
  return table;
}

BesselZeroTable bessel_j0_zeros_below(double x_max) {
  if (!(x_max > 2.5)) return {};
  const auto upper = static_cast<std::size_t>(x_max / kPi + 0.25);
  auto table = bessel_j0_zeros(upper);
  while (!table.zeros.empty() && table.zeros.back() > x_max) table.zeros.pop_back();
  return table;
}

}  // namespace fracpoisson::special
