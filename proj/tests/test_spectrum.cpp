#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "fracpoisson/errors.hpp"
#include "fracpoisson/extension.hpp"
#include "fracpoisson/fem.hpp"
#include "fracpoisson/mesh.hpp"
#include "fracpoisson/mgsolve.hpp"
#include "fracpoisson/spectrum.hpp"

using namespace fracpoisson;
using namespace fracpoisson::spectrum;
using mesh::Domain;
using std::numbers::pi;

namespace {

struct Setup {
  mesh::MeshHierarchy hier;
  std::vector<fem::FeSpace> spaces;
  mgsolve::MgHierarchy mg;
  std::vector<LevelInfo> levels;
};

Setup make_setup(Domain d, int order, int first, int last) {
  mesh::MeshHierarchy h(d);
  h.extend_to(last);
  std::vector<fem::FeSpace> sp;
  std::vector<LevelInfo> info;
  for (int l = first; l <= last; ++l) {
    sp.emplace_back(h.level_ptr(l), order);
    info.push_back({l, h.h(l), sp.back().n()});
  }
  auto mg = mgsolve::build_mg(sp);
  return {std::move(h), std::move(sp), std::move(mg), std::move(info)};
}

std::vector<double> square_exact(std::size_t count) {
  std::vector<double> all;
  for (int p = 1; p <= 200; ++p)
    for (int q = 1; q <= 200; ++q) all.push_back(pi * pi * (p * p + q * q));
  std::sort(all.begin(), all.end());
  all.resize(count);
  return all;
}

Eigen::MatrixXd dense(const fem::SparseOperator& op) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(op.rows(), op.cols());
  const auto& p = op.pattern();
  for (std::size_t i = 0; i < p.rows; ++i)
    for (std::size_t k = p.row_ptr[i]; k < p.row_ptr[i + 1]; ++k) a(i, p.col[k]) = op.values()[k];
  return a;
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= x.size();
  my /= y.size();
  double num = 0, den = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    den += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  return num / den;
}

}  // namespace

TEST_CASE("Weyl law constants and asymptotics") {
  CHECK(weyl_constant(2) == doctest::Approx(4 * pi).epsilon(1e-15));
  CHECK(weyl_constant(3) == doctest::Approx(4 * pi * std::pow(0.75 * std::sqrt(pi), 2.0 / 3.0)).epsilon(1e-14));
  CHECK(weyl_constant(3) == doctest::Approx(4 * pi * pi / std::pow(4 * pi / 3, 2.0 / 3.0)).epsilon(1e-14));
  CHECK(weyl_eigenvalue(10, 2, 1.0) == doctest::Approx(40 * pi));
  CHECK_THROWS_AS(weyl_eigenvalue(0, 2, 1.0), DomainError);
  const auto exact = square_exact(20000);
  for (std::size_t m : {1000u, 5000u, 20000u}) {
    const double ratio = weyl_eigenvalue(m, 2, 1.0) / exact[m - 1];
    CAPTURE(m);
    CHECK(std::abs(ratio - 1.0) < 60.0 / std::sqrt(static_cast<double>(m)));
  }
  CHECK(std::abs(weyl_eigenvalue(20000, 2, 1.0) / exact[19999] - 1.0) < 0.012);
}

TEST_CASE("g of the Weyl ratio decays like the inverse eigenvalue") {
  const auto exact = square_exact(501);
  std::vector<double> lam, g;
  for (double s : {0.25, 0.75}) {
    lam.clear();
    g.clear();
    for (std::size_t m = 50; m <= 500; ++m) {
      lam.push_back(exact[m]);
      g.push_back(extension::g_fn(s, weyl_eigenvalue(m + 1, 2, 1.0) / exact[m]));
    }
    CAPTURE(s);
    CHECK(std::abs(slope(lam, g) + 1.0) <= 0.15);
  }
}

TEST_CASE("truncation and crossover indices") {
  CHECK(choose_M(0.01, 1, 0.5, 0.25, 2, pi) == 2500);
  CHECK(crossover_m0(0.01, 1, 0.5, 0.25, 2) == 52);
  CHECK(crossover_m0(0.1, 1, 0.5, 0.25, 2) == 8);
  // halving h multiplies M by 2^{d min/(r+s)}
  const double f = static_cast<double>(choose_M(0.005, 1, 0.5, 0.25, 2, pi)) / choose_M(0.01, 1, 0.5, 0.25, 2, pi);
  CHECK(f == doctest::Approx(4.0).epsilon(1e-3));
  const double g = static_cast<double>(choose_M(0.001, 1, 1.75, 0.25, 2, 1.0)) / choose_M(0.002, 1, 1.75, 0.25, 2, 1.0);
  CHECK(g == doctest::Approx(2.0).epsilon(1e-2));
  CHECK(choose_M(0.01, 1, 2.0, 0.25, 2, pi) < choose_M(0.01, 1, 1.0, 0.25, 2, pi));
  for (int d : {2, 3})
    for (int k : {1, 2})
      for (double s : {0.25, 0.75})
        for (double r : {0.5, 2.0})
          {
            // m0 grows more slowly than M under refinement
            const double gm = std::log(static_cast<double>(choose_M(1e-4, k, r, s, d, 1.0)) / choose_M(1e-2, k, r, s, d, 1.0));
            const double g0 = std::log(static_cast<double>(crossover_m0(1e-4, k, r, s, d)) / crossover_m0(1e-2, k, r, s, d));
            CHECK(g0 < gm);
          }
  CHECK(choose_M(10.0, 1, 0.5, 0.25, 2, 1.0) == 1);
  CHECK_THROWS_AS(choose_M(0.0, 1, 0.5, 0.5, 2, 1.0), DomainError);
  CHECK_THROWS_AS(crossover_m0(0.1, 3, 0.5, 0.5, 2), ConfigurationError);
}

TEST_CASE("coarse level selection") {
  const std::vector<LevelInfo> lv{{0, 0.5, 7}, {1, 0.25, 37}, {2, 0.125, 169}, {3, 0.0625, 721}};
  // bound h^{0.75*3/(1.75*2)} at h = 1/16 is ~0.168
  CHECK(coarse_h_bound(0.0625, 1, 0.5, 0.25) == doctest::Approx(std::pow(0.0625, 0.75 * 3 / 3.5)));
  CHECK(coarse_h_bound(0.0625, 1, 2.0, 0.25) == doctest::Approx(0.25));
  auto c = select_coarse_level(lv, 0.0625, 1, 0.5, 0.25, 5);
  CHECK(c.index == 2);
  CHECK(c.m0 == 5);
  c = select_coarse_level(lv, 0.0625, 1, 0.5, 0.25, 100);
  CHECK(c.index == 3);
  c = select_coarse_level(lv, 0.0625, 1, 0.5, 0.25, 500);
  CHECK(c.index == 3);
  CHECK(c.m0 == 360);
  c = select_coarse_level(lv, 0.0625, 1, 0.5, 0.25, 1, 1e-6);
  CHECK(c.index == 2);
}

TEST_CASE("LOBPCG matches a dense generalized eigensolve") {
  auto st = make_setup(Domain::square, 1, 1, 4);
  const auto& top = st.mg.level(st.mg.num_levels() - 1);
  const auto eig = coarse_fem_eigs(st.mg, 30);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(dense(*top.stiffness), dense(*top.mass));
  REQUIRE(eig.values.size() == 30);
  for (std::size_t i = 0; i < 30; ++i) {
    CHECK(eig.values[i] == doctest::Approx(es.eigenvalues()[static_cast<Eigen::Index>(i)]).epsilon(1e-10));
    CHECK(eig.residuals[i] <= 1e-8 * eig.values[i]);
  }
  const auto mm = dense(*top.mass);
  for (std::size_t i = 0; i < 30; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      const Eigen::Map<const Eigen::VectorXd> a(eig.vectors[i].data(), top.mass->rows());
      const Eigen::Map<const Eigen::VectorXd> b(eig.vectors[j].data(), top.mass->rows());
      CHECK(std::abs(a.dot(mm * b) - (i == j ? 1.0 : 0.0)) < 1e-10);
    }
  CHECK_THROWS_AS(coarse_fem_eigs(st.mg, 200), ConfigurationError);
}

TEST_CASE("FEM eigenvalues bound the square spectrum from above") {
  auto st = make_setup(Domain::square, 1, 1, 5);
  const auto eig = coarse_fem_eigs(st.mg, 30);
  const auto exact = square_exact(30);
  for (std::size_t i = 0; i < 30; ++i) {
    CAPTURE(i);
    CHECK(eig.values[i] >= exact[i]);
    CHECK(eig.residuals[i] <= 1e-8 * eig.values[i]);
  }
  auto p2 = make_setup(Domain::square, 2, 0, 3);
  const auto e2 = coarse_fem_eigs(p2.mg, 30);
  for (std::size_t i = 0; i < 30; ++i) CHECK(e2.values[i] >= exact[i] * (1 - 1e-12));
}

TEST_CASE("FEM eigenvalue error drops fourfold per refinement") {
  std::vector<double> err;
  for (int l = 3; l <= 6; ++l) {
    auto st = make_setup(Domain::square, 1, 1, l);
    err.push_back(coarse_fem_eigs(st.mg, 3).values[0] / (2 * pi * pi) - 1.0);
  }
  for (std::size_t i = 1; i < err.size(); ++i) CHECK(err[i - 1] / err[i] == doctest::Approx(4.0).epsilon(0.1));

  auto disc = make_setup(Domain::disc, 1, 0, 5);
  const double z = 2.404825557695772768621631879;
  const double lam = coarse_fem_eigs(disc.mg, 4).values[0];
  CHECK(lam > z * z);
  CHECK(lam < z * z * 1.01);
}

TEST_CASE("decimation") {
  const auto p = extension::make_params(0.25, 0.5);
  std::vector<double> same(50, 7.0);
  std::vector<Provenance> weyl(50);
  auto one = decimate(same, weyl, p, 0.1, 1, 2, 1.0);
  CHECK(one.size() == 1);
  CHECK(one.multiplicity[0] == 50);

  std::vector<double> cand;
  for (std::size_t m = 1; m <= 400; ++m) cand.push_back(weyl_eigenvalue(m, 2, pi) * (1 + 1e-3 * (m % 3)));
  std::sort(cand.begin(), cand.end());
  std::vector<Provenance> prov(cand.size());
  auto fine = decimate(cand, prov, p, 1e-300, 1, 2, pi);
  CHECK(fine.size() == cand.size());

  for (double h : {0.2, 0.05, 0.01}) {
    auto sp = decimate(cand, prov, p, h, 1, 2, pi);
    std::size_t total = 0;
    for (auto m : sp.multiplicity) total += m;
    CHECK(total == cand.size());
    CHECK(sp.M == cand.size());
    for (std::size_t i = 1; i < sp.size(); ++i) CHECK(sp.values[i] > sp.values[i - 1] * (1 + 1e-12));
    const double cap = std::min(std::sqrt(std::numbers::e / 2 * 0.25 / 0.75), 1.0);
    for (std::size_t m = 0; m < cand.size(); ++m) {
      const double thr = p.kappa_s * std::min(std::pow(weyl_eigenvalue(m + 1, 2, pi), 0.375) * std::pow(h, 0.75), cap);
      CHECK(std::abs(std::log(sp.values[sp.assignment[m]] / cand[m])) <= thr * (1 + 1e-12));
    }
  }
  auto coarse = decimate(cand, prov, p, 0.2, 1, 2, pi);
  auto finer = decimate(cand, prov, p, 0.01, 1, 2, pi);
  CHECK(coarse.size() < finer.size());
  CHECK(coarse.size() < cand.size() / 4);

  std::vector<double> unsorted{2.0, 1.0};
  std::vector<Provenance> two(2);
  CHECK_THROWS_AS(decimate(unsorted, two, p, 0.1, 1, 2, 1.0), PreconditionError);
}

TEST_CASE("pipeline end to end on the disc") {
  auto st = make_setup(Domain::disc, 1, 0, 4);
  PipelineInput in;
  in.mg = &st.mg;
  in.levels = st.levels;
  in.params = extension::make_params(0.25, 0.5);
  in.k = 1;
  in.d = 2;
  in.domain_measure = pi;
  const auto res = build_spectrum(in);
  const double h = st.levels.back().h;
  CHECK(res.approx.M == choose_M(h, 1, 0.5, 0.25, 2, pi, in.constants.c_m));
  CHECK(res.m0 == crossover_m0(h, 1, 0.5, 0.25, 2));
  CHECK(res.approx.size() <= res.approx.M);
  CHECK(res.approx.size() >= 1);
  CHECK(res.max_residual <= 1e-8);
  const double z = 2.404825557695772768621631879;
  CHECK(res.approx.candidates[0] > z * z);
  CHECK(!res.approx.candidate_provenance[0].is_weyl());
  for (std::size_t i = 1; i < res.approx.candidates.size(); ++i) {
    CHECK(res.approx.candidates[i] >= res.approx.candidates[i - 1]);
  }
  std::ostringstream os;
  write_csv(res.approx, os);
  const auto text = os.str();
  CHECK(text.rfind("index,lambda_tilde,source,level,lambda_hat\n", 0) == 0);
  CHECK(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')) == res.approx.M + 1);
  CHECK(text.find(",fem,") != std::string::npos);
  CHECK(text.find(",weyl,-1,") != std::string::npos);

  // the factorization of the decimated spectrum satisfies the rational identity
  const auto f = extension::factorize(res.approx.values, in.params);
  for (double l : res.approx.values) {
    CHECK(std::abs(extension::rational(f, in.params, l) / std::pow(l, -0.25) - 1.0) <= 1e-6);
  }
}
