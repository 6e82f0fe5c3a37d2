#pragma once

#include <cstddef>
#include <vector>

namespace fracpoisson::special {

// Gamma function for x > 0.
double gamma(double x);

// Bessel function of the first kind, nu in [0, 10], x in [0, 1e5].
double bessel_j(double nu, double x);

// Modified Bessel function of the second kind, nu in (0, 1), x > 0.
double bessel_k(double nu, double x);

struct BesselZeroTable {
  std::vector<double> zeros;
  std::size_t count() const noexcept { return zeros.size(); }
  double operator[](std::size_t k) const { return zeros[k]; }
};

// First `count` positive zeros of J0, McMahon start + Newton polish.
BesselZeroTable bessel_j0_zeros(std::size_t count);

// Zeros of J0 not exceeding x_max.
BesselZeroTable bessel_j0_zeros_below(double x_max);

namespace detail {
double bessel_j_series(double nu, double x);
double bessel_j_miller(double nu, double x);
double bessel_j_hankel(double nu, double x);
double bessel_k_connection(double nu, double x);
double bessel_k_steed(double nu, double x);
}  // namespace detail

}  // namespace fracpoisson::special
