#include "fracpoisson/verify.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fracpoisson/errors.hpp"
#include "fracpoisson/quadrature.hpp"
#include "fracpoisson/special.hpp"

namespace fracpoisson::verify {

namespace {

using std::numbers::pi;

struct Neumaier {
  double sum = 0.0, c = 0.0;
  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      c += (sum - t) + x;
    else
      c += (x - t) + sum;
    sum = t;
  }
  double value() const { return sum + c; }
};

void check_data(const extension::FractionalParams& p) {
  if (!(p.r >= 0.5)) throw DomainError("reference energies need r >= 1/2");
}

bool heat_trace_supported(double r) { return r == 0.5 || r == 2.0; }

// ||U||^2 = d_s / Gamma(s) * int_0^inf t^{s-1} G(t)^d dt with G(t) = sum_p c_p^2 exp(-pi^2 p^2 t).
SeriesValue heat_trace_energy(const extension::FractionalParams& p, int d) {
  const double r = p.r;
  const double s = p.s;
  const double t0 = r == 0.5 ? 1e-3 : 1e-8;
  const double t_max = 10.0;
  const int p_max = static_cast<int>(std::ceil(std::sqrt(60.0 / (pi * pi * t0)))) | 1;
  std::vector<double> c2;
  c2.reserve(static_cast<std::size_t>(p_max / 2 + 1));
  for (int q = 1; q <= p_max; q += 2) {
    const double c = sine_coefficient(q, r);
    c2.push_back(c * c);
  }
  auto g = [&](double t) {
    const int top = std::min(p_max, static_cast<int>(std::ceil(std::sqrt(60.0 / (pi * pi * t)))) | 1);
    Neumaier acc;
    for (int q = top; q >= 1; q -= 2) acc.add(c2[static_cast<std::size_t>(q / 2)] * std::exp(-pi * pi * q * q * t));
    return acc.value();
  };

  // [0, t0]: G(t) = 1 - 4 sqrt(t/pi) (r = 1/2, exact up to exp(-1/(4t))) or G0 - G1 t (r = 2)
  const double g0 = r == 0.5 ? 1.0 : std::beta(2 * r, 2 * r);
  const double g1 = r == 0.5 ? 4.0 / std::sqrt(pi) : 0.075;
  const double step = r == 0.5 ? 0.5 : 1.0;
  double head = 0.0;
  double binom = 1.0;
  for (int j = 0; j <= d; ++j) {
    if (j > 0) binom = binom * (d - j + 1) / j;
    head += binom * std::pow(g0, d - j) * std::pow(-g1, j) * std::pow(t0, s + step * j) / (s + step * j);
  }

  // [t0, t_max] in x = log t, unit panels, Gauss-Legendre 20 vs 30 points
  const auto gl20 = quadrature::gauss_legendre(20);
  const auto gl30 = quadrature::gauss_legendre(30);
  const double x0 = std::log(t0), x1 = std::log(t_max);
  const int panels = static_cast<int>(std::ceil(x1 - x0));
  const double width = (x1 - x0) / panels;
  auto integrand = [&](double x) {
    const double t = std::exp(x);
    return std::pow(t, s) * std::pow(g(t), d);
  };
  Neumaier body;
  double diff = 0.0;
  for (int k = 0; k < panels; ++k) {
    const double a = x0 + k * width;
    double i20 = 0.0, i30 = 0.0;
    for (std::size_t q = 0; q < gl20.nodes.size(); ++q) i20 += gl20.weights[q] * integrand(a + width * gl20.nodes[q]);
    for (std::size_t q = 0; q < gl30.nodes.size(); ++q) i30 += gl30.weights[q] * integrand(a + width * gl30.nodes[q]);
    body.add(i30 * width);
    diff += std::abs(i30 - i20) * width;
  }
  const double scale = p.d_s / special::gamma(s);
  SeriesValue out;
  out.value = scale * (head + body.value());
  out.terms_used = c2.size();
  const double head_err = r == 0.5 ? 0.0 : d * std::pow(g0, d - 1) * std::pow(t0, 2 + s) * std::log(1 / t0) / (2 + s);
  out.tail_bound = scale * (head_err + diff) + 1e-15 * out.value;
  return out;
}

double direct_sum(const extension::FractionalParams& p, int d, int p_max) {
  std::vector<double> c2;
  for (int q = 1; q <= p_max; q += 2) {
    const double c = sine_coefficient(q, p.r);
    c2.push_back(c * c);
  }
  const std::size_t m = c2.size();
  Neumaier acc;
  for (std::size_t i = m; i-- > 0;) {
    const double pi2 = static_cast<double>((2 * i + 1) * (2 * i + 1));
    for (std::size_t j = m; j-- > 0;) {
      const double pj2 = static_cast<double>((2 * j + 1) * (2 * j + 1));
      if (d == 2) {
        acc.add(c2[i] * c2[j] * std::pow(pi * pi * (pi2 + pj2), -p.s));
      } else {
        double row = 0.0;
        for (std::size_t k = m; k-- > 0;) {
          const double pk2 = static_cast<double>((2 * k + 1) * (2 * k + 1));
          row += c2[k] * std::pow(pi * pi * (pi2 + pj2 + pk2), -p.s);
        }
        acc.add(c2[i] * c2[j] * row);
      }
    }
  }
  return p.d_s * acc.value();
}

}  // namespace

double sine_coefficient(int p, double r) {
  if (p < 1) throw DomainError("sine mode index starts at 1");
  if (p % 2 == 0) return 0.0;
  const double z = pi * p;
  const double sign = (p / 2) % 2 == 0 ? 1.0 : -1.0;
  return sign * std::sqrt(2 * pi) * special::gamma(r + 0.5) * special::bessel_j(r, z / 2) / std::pow(z, r);
}

SeriesValue energy_disc(const extension::FractionalParams& p, double zero_limit) {
  check_data(p);
  const double r = p.r, s = p.s;
  const double nu = r + 0.5;
  const auto zeros = special::bessel_j0_zeros_below(zero_limit);
  const std::size_t count = zeros.count();
  Neumaier acc;
  for (std::size_t k = count; k-- > 0;) {
    const double a = zeros[k];
    const double ratio = special::bessel_j(nu, a) / (std::pow(a, s + nu) * special::bessel_j(1.0, a));
    acc.add(ratio * ratio);
  }
  // alpha_k ~ (k - 1/4) pi and J_nu / J_1 -> -+ sin(nu pi / 2) at the zeros of J_0
  const double e = 2 * s + 2 * nu;
  const double amp = std::pow(std::sin(nu * pi / 2), 2);
  const double kk = static_cast<double>(count) + 0.25;
  const double tail = amp * std::pow(pi, -e) * std::pow(kk, 1 - e) / (e - 1);
  const double front = p.d_s * std::pow(2.0, 2 * r + 1) * pi * std::pow(special::gamma(r + 0.5), 2);
  SeriesValue out;
  out.value = front * (acc.value() + tail);
  out.terms_used = count;
  out.tail_bound = front * (tail * (10.0 / zeros[count - 1]) + std::pow(pi, -e) * std::pow(kk, -e)) + 1e-15 * out.value;
  return out;
}

SeriesValue energy_square(const extension::FractionalParams& p) {
  check_data(p);
  if (heat_trace_supported(p.r)) return heat_trace_energy(p, 2);
  SeriesValue out;
  out.value = direct_sum(p, 2, 3999);
  out.terms_used = 2000 * 2000;
  out.tail_bound = std::abs(out.value - direct_sum(p, 2, 1999));
  return out;
}

SeriesValue energy_cube(const extension::FractionalParams& p) {
  check_data(p);
  if (heat_trace_supported(p.r)) return heat_trace_energy(p, 3);
  SeriesValue out;
  out.value = direct_sum(p, 3, 599);
  out.terms_used = 300 * 300 * 300;
  out.tail_bound = std::abs(out.value - direct_sum(p, 3, 299));
  return out;
}

SeriesValue energy(mesh::Domain domain, const extension::FractionalParams& p) {
  switch (domain) {
    case mesh::Domain::disc:
      return energy_disc(p);
    case mesh::Domain::square:
      return energy_square(p);
    case mesh::Domain::cube:
      return energy_cube(p);
  }
  throw ConfigurationError("unknown domain");
}

double energy_square_direct(const extension::FractionalParams& p, int p_max) { return direct_sum(p, 2, p_max); }
double energy_cube_direct(const extension::FractionalParams& p, int p_max) { return direct_sum(p, 3, p_max); }

ErrorValue h1alpha_error(const solver::ProblemSpec& spec, const solver::Solution& solution, const SeriesValue& energy) {
  const double inner = solver::htrace_error_inner(spec, solution);
  ErrorValue out;
  out.squared = energy.value - 2.0 * spec.params.d_s * inner + solution.discrete_energy;
  out.clamped = out.squared < -1e-12 * energy.value;
  out.error = std::sqrt(std::max(0.0, out.squared));
  return out;
}

std::vector<double> kron_oracle_solve(const solver::ProblemSpec& spec, const solver::Discretization& disc) {
  (void)spec;
  const auto& mfe = disc.mass();
  const auto& sfe = disc.stiffness();
  const auto& ms = disc.factor.m_sigma;
  const auto& ss = disc.factor.s_sigma;
  const std::size_t n = mfe.rows();
  const std::size_t mt = ms.size();
  const std::size_t big = n * mt;
  if (big > kKronLimit) {
    throw ConfigurationError("Kronecker oracle refuses n * M_tilde = " + std::to_string(big) + " > " +
                             std::to_string(kKronLimit));
  }
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(big), static_cast<Eigen::Index>(big));
  const auto& pat = mfe.pattern();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = pat.row_ptr[i]; k < pat.row_ptr[i + 1]; ++k) {
      const std::size_t j = pat.col[k];
      const double mv = mfe.values()[k];
      const double sv = sfe.entry(i, j);
      for (std::size_t m = 0; m < mt; ++m)
        for (std::size_t l = 0; l < mt; ++l) {
          a(static_cast<Eigen::Index>(i * mt + m), static_cast<Eigen::Index>(j * mt + l)) = mv * ss(m, l) + sv * ms(m, l);
        }
    }
  }
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(big));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t m = 0; m < mt; ++m) rhs[static_cast<Eigen::Index>(i * mt + m)] = disc.load[i];
  const Eigen::VectorXd dinv = a.diagonal().cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd scaled = dinv.asDiagonal() * a * dinv.asDiagonal();
  Eigen::LDLT<Eigen::MatrixXd> ldlt(scaled);
  if (ldlt.info() != Eigen::Success) throw NumericalError("Kronecker oracle factorization failed");
  const Eigen::VectorXd x = dinv.asDiagonal() * ldlt.solve(dinv.asDiagonal() * rhs);
  std::vector<double> trace(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    Neumaier acc;
    for (std::size_t m = 0; m < mt; ++m) acc.add(x[static_cast<Eigen::Index>(i * mt + m)]);
    trace[i] = acc.value();
  }
  return trace;
}

}  // namespace fracpoisson::verify
