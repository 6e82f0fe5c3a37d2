#include "fracpoisson/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <numeric>
#include <ostream>
#include <string>

#include "fracpoisson/errors.hpp"
#include "fracpoisson/special.hpp"

namespace fracpoisson::spectrum {

namespace {

// ceil that ignores floating-point noise just above an integer
std::size_t ceil_count(double x) {
  const double c = std::ceil(x * (1.0 - 1e-12));
  return c < 1.0 ? 1 : static_cast<std::size_t>(c);
}

void check_inputs(double h, int k, double r, double s) {
  if (!(h > 0.0)) throw DomainError("mesh size must be positive");
  if (k != 1 && k != 2) throw ConfigurationError("element order must be 1 or 2");
  if (!(s > 0.0 && s < 1.0)) throw DomainError("s must lie in (0,1)");
  if (r < -s) throw DomainError("r must satisfy r >= -s");
}

double min_order(int k, double r, double s) { return std::min(static_cast<double>(k), r + s); }

}  // namespace

double weyl_constant(int d) { return 4.0 * std::numbers::pi * std::pow(special::gamma(1.0 + d / 2.0), 2.0 / d); }

double weyl_eigenvalue(std::size_t m, int d, double domain_measure) {
  if (m < 1) throw DomainError("Weyl index starts at 1");
  if (d < 1 || d > 3) throw DomainError("dimension must be 1, 2 or 3");
  return weyl_constant(d) * std::pow(static_cast<double>(m) / domain_measure, 2.0 / d);
}

std::size_t choose_M(double h, int k, double r, double s, int d, double domain_measure, double c_m) {
  check_inputs(h, k, r, s);
  const double target = std::pow(h, -2.0 * min_order(k, r, s) / (r + s));
  return ceil_count(c_m * domain_measure * std::pow(target / weyl_constant(d), d / 2.0));
}

std::size_t crossover_m0(double h, int k, double r, double s, int d, double c_cross) {
  check_inputs(h, k, r, s);
  return ceil_count(c_cross * std::pow(h, -d * min_order(k, r, s) / (1.0 + r + s)));
}

double coarse_h_bound(double h, int k, double r, double s, double c_h) {
  check_inputs(h, k, r, s);
  const double e = r + s <= 2.0 * k ? min_order(k, r, s) * (1.0 + 2.0 * k) / ((1.0 + r + s) * 2.0 * k) : 0.5;
  return c_h * std::pow(h, e);
}

CoarseChoice select_coarse_level(std::span<const LevelInfo> levels, double h, int k, double r, double s,
                                 std::size_t m0, double c_h) {
  if (levels.empty()) throw ConfigurationError("no levels to choose a coarse eigenvalue level from");
  const double bound = coarse_h_bound(h, k, r, s, c_h);
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i].h <= bound * (1.0 + 1e-12) && levels[i].n > 2 * m0) return {i, m0};
  }
  const std::size_t last = levels.size() - 1;
  if (last > 0 && levels[last - 1].n > 2 * m0) return {last - 1, m0};
  if (levels[last].n > 2 * m0) return {last, m0};
  return {last, (levels[last].n - 1) / 2};
}

lobpcg::EigenPairs coarse_fem_eigs(const mgsolve::MgHierarchy& mg, std::size_t count, const lobpcg::Options& options) {
  const auto& top = mg.level(mg.num_levels() - 1);
  return lobpcg::solve(*top.stiffness, *top.mass, mg, count, options);
}

void merge_candidates(std::span<const double> fem_values, int fem_level, std::size_t M, int d, double domain_measure,
                      std::vector<double>& values, std::vector<Provenance>& provenance) {
  const std::size_t m0 = std::min(fem_values.size(), M);
  std::vector<std::pair<double, Provenance>> all;
  all.reserve(M);
  for (std::size_t m = 0; m < m0; ++m) all.push_back({fem_values[m], Provenance{fem_level}});
  for (std::size_t m = m0; m < M; ++m) all.push_back({weyl_eigenvalue(m + 1, d, domain_measure), Provenance{-1}});
  std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  values.resize(all.size());
  provenance.resize(all.size());
  for (std::size_t i = 0; i < all.size(); ++i) {
    values[i] = all[i].first;
    provenance[i] = all[i].second;
  }
}

SpectrumApprox decimate(std::span<const double> candidates, std::span<const Provenance> provenance,
                        const extension::FractionalParams& params, double h, int k, int d, double domain_measure) {
  if (candidates.empty()) throw PreconditionError("decimate: empty candidate list");
  if (provenance.size() != candidates.size()) throw PreconditionError("decimate: provenance length mismatch");
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (!(candidates[i] > 0.0) || !std::isfinite(candidates[i])) {
      throw PreconditionError("decimate: candidates must be positive and finite");
    }
    if (i > 0 && candidates[i] < candidates[i - 1]) throw PreconditionError("decimate: candidates must be sorted");
  }
  const double s = params.s;
  const double rs = params.r + s;
  const double cap = std::min(std::sqrt(std::numbers::e / 2.0 * std::min(s, 1.0 - s) / std::max(s, 1.0 - s)), 1.0);
  const double hpow = std::pow(h, min_order(k, params.r, s));

  SpectrumApprox out;
  out.M = candidates.size();
  out.candidates.assign(candidates.begin(), candidates.end());
  out.candidate_provenance.assign(provenance.begin(), provenance.end());
  out.assignment.resize(out.M);
  out.values.push_back(candidates[0]);
  out.provenance.push_back(provenance[0]);
  out.multiplicity.push_back(1);
  for (std::size_t m = 1; m < out.M; ++m) {
    const double c = candidates[m];
    const double prev = out.values.back();
    const double thr =
        params.kappa_s * std::min(std::pow(weyl_eigenvalue(m + 1, d, domain_measure), rs / 2.0) * hpow, cap);
    if (std::abs(std::log(prev / c)) <= thr || (c - prev) < 1e-12 * c) {
      ++out.multiplicity.back();
    } else {
      out.values.push_back(c);
      out.provenance.push_back(provenance[m]);
      out.multiplicity.push_back(1);
    }
    out.assignment[m] = out.values.size() - 1;
  }
  return out;
}

PipelineResult build_spectrum(const PipelineInput& in) {
  if (!in.mg || in.levels.size() != in.mg->num_levels()) {
    throw ConfigurationError("spectrum pipeline: level list does not match the multigrid hierarchy");
  }
  const auto& p = in.params;
  const double h = in.levels.back().h;
  PipelineResult res;
  const std::size_t M = choose_M(h, in.k, p.r, p.s, in.d, in.domain_measure, in.constants.c_m);
  const std::size_t m0 = std::min(crossover_m0(h, in.k, p.r, p.s, in.d, in.constants.c_cross), M);
  const auto choice = select_coarse_level(in.levels, h, in.k, p.r, p.s, m0, in.constants.c_h);
  res.m0 = choice.m0;
  res.coarse_level = in.levels[choice.index].level;

  std::vector<double> fem_values;
  if (res.m0 > 0) {
    const auto sub = in.mg->prefix(choice.index + 1);
    const auto eig = coarse_fem_eigs(sub, res.m0);
    fem_values = eig.values;
    res.eig_iterations = eig.iterations;
    for (std::size_t i = 0; i < eig.residuals.size(); ++i) {
      res.max_residual = std::max(res.max_residual, eig.residuals[i] / eig.values[i]);
    }
  }
  std::vector<double> cand;
  std::vector<Provenance> prov;
  merge_candidates(fem_values, res.coarse_level, M, in.d, in.domain_measure, cand, prov);
  res.approx = decimate(cand, prov, p, h, in.k, in.d, in.domain_measure);
  return res;
}

void write_csv(const SpectrumApprox& sp, std::ostream& out) {
  out << "index,lambda_tilde,source,level,lambda_hat\n";
  out << std::setprecision(17);
  for (std::size_t i = 0; i < sp.candidates.size(); ++i) {
    const auto& pv = sp.candidate_provenance[i];
    out << i << ',' << sp.candidates[i] << ',' << (pv.is_weyl() ? "weyl" : "fem") << ',' << pv.level << ','
        << sp.values[sp.assignment[i]] << '\n';
  }
}

}  // namespace fracpoisson::spectrum
