#include "fracpoisson/fem.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>
#include <string>

#include "fracpoisson/errors.hpp"
#include "fracpoisson/quadrature.hpp"

namespace fracpoisson::fem {

namespace {

using mesh::Index;

// Polynomials in barycentric coordinates, used once to build reference tensors.
struct Monomial {
  std::array<int, 4> exp{};
  double coef = 0.0;
};
using Poly = std::vector<Monomial>;

Poly multiply(const Poly& a, const Poly& b) {
  Poly out;
  for (const auto& x : a) {
    for (const auto& y : b) {
      Monomial m;
      for (int k = 0; k < 4; ++k) m.exp[k] = x.exp[k] + y.exp[k];
      m.coef = x.coef * y.coef;
      out.push_back(m);
    }
  }
  return out;
}

double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

// (1/|K|) * integral over the simplex of a barycentric polynomial
double integrate_ref(const Poly& p, int dim) {
  double total = 0.0;
  for (const auto& m : p) {
    int deg = 0;
    double num = factorial(dim);
    for (int k = 0; k < 4; ++k) {
      deg += m.exp[k];
      num *= factorial(m.exp[k]);
    }
    total += m.coef * num / factorial(dim + deg);
  }
  return total;
}

Monomial mono(double c, std::initializer_list<std::pair<int, int>> powers) {
  Monomial m;
  m.coef = c;
  for (auto [k, e] : powers) m.exp[k] += e;
  return m;
}

int dofs_per_cell_for(int dim, int order) {
  const int nv = dim + 1;
  return order == 1 ? nv : nv + static_cast<int>(mesh::local_edges(dim).size());
}

std::vector<Poly> basis_polys(int dim, int order) {
  std::vector<Poly> basis;
  for (int i = 0; i <= dim; ++i) {
    if (order == 1) basis.push_back({mono(1.0, {{i, 1}})});
    else basis.push_back({mono(2.0, {{i, 2}}), mono(-1.0, {{i, 1}})});
  }
  if (order == 2) {
    for (auto e : mesh::local_edges(dim)) basis.push_back({mono(4.0, {{e[0], 1}, {e[1], 1}})});
  }
  return basis;
}

// derivative of basis function i with respect to lambda_k
Poly basis_derivative(int dim, int order, int i, int k) {
  if (order == 1) return i == k ? Poly{mono(1.0, {})} : Poly{};
  if (i <= dim) return i == k ? Poly{mono(4.0, {{i, 1}}), mono(-1.0, {})} : Poly{};
  const auto e = mesh::local_edges(dim)[i - dim - 1];
  Poly out;
  if (e[0] == k) out.push_back(mono(4.0, {{e[1], 1}}));
  if (e[1] == k) out.push_back(mono(4.0, {{e[0], 1}}));
  return out;
}

struct RefTensors {
  int nb = 0;
  int nl = 0;
  std::vector<double> mass;   // nb x nb
  std::vector<double> stiff;  // nb x nb x nl x nl
};

RefTensors make_tensors(int dim, int order) {
  RefTensors t;
  const auto basis = basis_polys(dim, order);
  t.nb = static_cast<int>(basis.size());
  t.nl = dim + 1;
  t.mass.resize(t.nb * t.nb);
  t.stiff.resize(t.nb * t.nb * t.nl * t.nl);
  for (int i = 0; i < t.nb; ++i) {
    for (int j = 0; j < t.nb; ++j) t.mass[i * t.nb + j] = integrate_ref(multiply(basis[i], basis[j]), dim);
  }
  for (int i = 0; i < t.nb; ++i) {
    for (int j = 0; j < t.nb; ++j) {
      for (int k = 0; k < t.nl; ++k) {
        for (int l = 0; l < t.nl; ++l) {
          const auto p = multiply(basis_derivative(dim, order, i, k), basis_derivative(dim, order, j, l));
          t.stiff[((i * t.nb + j) * t.nl + k) * t.nl + l] = integrate_ref(p, dim);
        }
      }
    }
  }
  return t;
}

const RefTensors& tensors(int dim, int order) {
  static const std::array<RefTensors, 4> all{make_tensors(2, 1), make_tensors(2, 2), make_tensors(3, 1),
                                             make_tensors(3, 2)};
  return all[(dim - 2) * 2 + (order - 1)];
}

struct CellGeometry {
  double volume = 0.0;
  std::array<std::array<double, 3>, 4> grad{};  // gradients of barycentric coordinates
};

CellGeometry geometry(const mesh::Mesh& m, std::size_t c) {
  CellGeometry g;
  const double vol = mesh::signed_volume(m, c);
  if (!(vol >= 1e-14)) {
    throw AssemblyError("degenerate cell " + std::to_string(c) + " with volume " + std::to_string(vol), c);
  }
  g.volume = vol;
  const auto cell = m.cell(c);
  const int d = m.dim;
  std::array<std::array<double, 3>, 3> jac{};  // jac[r][k] = (p_{r+1} - p_0)_k
  for (int r = 0; r < d; ++r) {
    for (int k = 0; k < d; ++k) jac[r][k] = m.point(cell[r + 1])[k] - m.point(cell[0])[k];
  }
  // grad lambda_{r+1} is row r of jac^{-T}, i.e. column r of jac^{-1} transposed
  std::array<std::array<double, 3>, 3> inv{};
  if (d == 2) {
    const double det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
    inv[0][0] = jac[1][1] / det;
    inv[0][1] = -jac[0][1] / det;
    inv[1][0] = -jac[1][0] / det;
    inv[1][1] = jac[0][0] / det;
  } else {
    const auto& a = jac;
    const double det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
                       a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
                       a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    inv[0][0] = (a[1][1] * a[2][2] - a[1][2] * a[2][1]) / det;
    inv[0][1] = (a[0][2] * a[2][1] - a[0][1] * a[2][2]) / det;
    inv[0][2] = (a[0][1] * a[1][2] - a[0][2] * a[1][1]) / det;
    inv[1][0] = (a[1][2] * a[2][0] - a[1][0] * a[2][2]) / det;
    inv[1][1] = (a[0][0] * a[2][2] - a[0][2] * a[2][0]) / det;
    inv[1][2] = (a[0][2] * a[1][0] - a[0][0] * a[1][2]) / det;
    inv[2][0] = (a[1][0] * a[2][1] - a[1][1] * a[2][0]) / det;
    inv[2][1] = (a[0][1] * a[2][0] - a[0][0] * a[2][1]) / det;
    inv[2][2] = (a[0][0] * a[1][1] - a[0][1] * a[1][0]) / det;
  }
  // x = p0 + jac^T xi, so d xi_r / d x_k = inv[k][r]
  for (int r = 0; r < d; ++r) {
    for (int k = 0; k < d; ++k) {
      g.grad[r + 1][k] = inv[k][r];
      g.grad[0][k] -= inv[k][r];
    }
  }
  return g;
}

template <class Kernel>
SparseOperator assemble(const FeSpace& space, Kernel&& element) {
  const auto& pat = *space.pattern();
  std::vector<double> values(pat.nnz(), 0.0);
  const int nb = space.dofs_per_cell();
  std::vector<double> local(nb * nb);
  std::vector<std::int64_t> rows(nb);
  for (std::size_t c = 0; c < space.mesh().num_cells(); ++c) {
    element(c, local);
    const auto dofs = space.cell_dofs(c);
    for (int a = 0; a < nb; ++a) rows[a] = space.free_index(dofs[a]);
    for (int a = 0; a < nb; ++a) {
      if (rows[a] < 0) continue;
      const std::size_t lo = pat.row_ptr[rows[a]];
      const std::size_t hi = pat.row_ptr[rows[a] + 1];
      for (int b = 0; b < nb; ++b) {
        if (rows[b] < 0) continue;
        const auto it = std::lower_bound(pat.col.begin() + lo, pat.col.begin() + hi,
                                         static_cast<std::uint32_t>(rows[b]));
        values[static_cast<std::size_t>(it - pat.col.begin())] += local[a * nb + b];
      }
    }
  }
  return SparseOperator(space.pattern(), std::move(values), true);
}

std::shared_ptr<const CsrPattern> build_pattern(const FeSpace& space) {
  const std::size_t ndofs = space.num_dofs();
  const std::size_t nc = space.mesh().num_cells();
  const int nb = space.dofs_per_cell();
  std::vector<std::size_t> start(ndofs + 1, 0);
  for (std::size_t c = 0; c < nc; ++c) {
    for (auto d : space.cell_dofs(c)) ++start[d + 1];
  }
  for (std::size_t i = 0; i < ndofs; ++i) start[i + 1] += start[i];
  std::vector<Index> cells_of(start.back());
  {
    auto fill = start;
    for (std::size_t c = 0; c < nc; ++c) {
      for (auto d : space.cell_dofs(c)) cells_of[fill[d]++] = static_cast<Index>(c);
    }
  }
  auto pat = std::make_shared<CsrPattern>();
  pat->rows = pat->cols = space.n();
  pat->row_ptr.assign(1, 0);
  std::vector<std::uint32_t> row;
  for (auto dof : space.free_dofs()) {
    row.clear();
    for (std::size_t k = start[dof]; k < start[dof + 1]; ++k) {
      for (auto d : space.cell_dofs(cells_of[k])) {
        const auto fi = space.free_index(d);
        if (fi >= 0) row.push_back(static_cast<std::uint32_t>(fi));
      }
    }
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
    pat->col.insert(pat->col.end(), row.begin(), row.end());
    pat->row_ptr.push_back(pat->col.size());
  }
  (void)nb;
  return pat;
}

std::array<double, 3> bary_to_point(const mesh::Mesh& m, std::size_t c, std::span<const double> bary) {
  std::array<double, 3> x{};
  const auto cell = m.cell(c);
  for (int j = 0; j <= m.dim; ++j) {
    const auto p = m.point(cell[j]);
    for (int k = 0; k < m.dim; ++k) x[k] += bary[j] * p[k];
  }
  return x;
}

}  // namespace

SparseOperator::SparseOperator(std::shared_ptr<const CsrPattern> pattern, std::vector<double> values,
                               bool symmetric)
    : pattern_(std::move(pattern)), values_(std::move(values)), symmetric_(symmetric) {
  if (!pattern_ || values_.size() != pattern_->nnz()) {
    throw ConfigurationError("SparseOperator: values do not match the pattern");
  }
}

void SparseOperator::apply(std::span<const double> x, std::span<double> y) const {
  const auto& p = *pattern_;
  for (std::size_t i = 0; i < p.rows; ++i) {
    double s = 0.0;
    for (std::size_t k = p.row_ptr[i]; k < p.row_ptr[i + 1]; ++k) s += values_[k] * x[p.col[k]];
    y[i] = s;
  }
}

void SparseOperator::apply_transpose(std::span<const double> x, std::span<double> y) const {
  const auto& p = *pattern_;
  std::fill(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(p.cols), 0.0);
  for (std::size_t i = 0; i < p.rows; ++i) {
    const double xi = x[i];
    for (std::size_t k = p.row_ptr[i]; k < p.row_ptr[i + 1]; ++k) y[p.col[k]] += values_[k] * xi;
  }
}

double SparseOperator::entry(std::size_t i, std::size_t j) const {
  const auto& p = *pattern_;
  const auto first = p.col.begin() + static_cast<std::ptrdiff_t>(p.row_ptr[i]);
  const auto last = p.col.begin() + static_cast<std::ptrdiff_t>(p.row_ptr[i + 1]);
  const auto it = std::lower_bound(first, last, static_cast<std::uint32_t>(j));
  if (it == last || *it != j) return 0.0;
  return values_[static_cast<std::size_t>(it - p.col.begin())];
}

std::vector<double> SparseOperator::diagonal() const {
  std::vector<double> d(rows(), 0.0);
  for (std::size_t i = 0; i < rows(); ++i) d[i] = entry(i, i);
  return d;
}

double SparseOperator::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

void apply_shifted(const SparseOperator& mass, const SparseOperator& stiffness, double sigma,
                   std::span<const double> x, std::span<double> y) {
  if (mass.pattern_ptr() != stiffness.pattern_ptr()) {
    std::vector<double> tmp(y.size());
    mass.apply(x, tmp);
    stiffness.apply(x, y);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += sigma * tmp[i];
    return;
  }
  const auto& p = mass.pattern();
  const auto mv = mass.values();
  const auto sv = stiffness.values();
  for (std::size_t i = 0; i < p.rows; ++i) {
    double s = 0.0;
    for (std::size_t k = p.row_ptr[i]; k < p.row_ptr[i + 1]; ++k) s += (sigma * mv[k] + sv[k]) * x[p.col[k]];
    y[i] = s;
  }
}

SparseOperator shifted_operator(const SparseOperator& mass, const SparseOperator& stiffness, double sigma) {
  if (mass.pattern_ptr() != stiffness.pattern_ptr()) {
    throw ConfigurationError("shifted_operator: mass and stiffness use different patterns");
  }
  const auto mv = mass.values();
  const auto sv = stiffness.values();
  std::vector<double> values(mv.size());
  for (std::size_t k = 0; k < mv.size(); ++k) values[k] = sigma * mv[k] + sv[k];
  return SparseOperator(mass.pattern_ptr(), std::move(values), mass.symmetric() && stiffness.symmetric());
}

FeSpace::FeSpace(std::shared_ptr<const mesh::Mesh> mesh, int order, bool eliminate_dirichlet)
    : mesh_(std::move(mesh)), order_(order) {
  if (!mesh_) throw ConfigurationError("FeSpace: null mesh");
  if (order != 1 && order != 2) throw ConfigurationError("FeSpace: order must be 1 or 2");
  if (order == 2 && mesh_->dim == 3) {
    throw ConfigurationError("FeSpace: P2 elements are supported in two dimensions only");
  }
  const auto& m = *mesh_;
  const int d = m.dim;
  dofs_per_cell_ = dofs_per_cell_for(d, order);
  const std::size_t nv = m.num_vertices();
  if (order == 2) edges_ = mesh::build_edges(m);
  const std::size_t ndofs = nv + (order == 2 ? edges_.edges.size() : 0);

  dof_coords_ = m.coords;
  dirichlet_.assign(m.boundary.begin(), m.boundary.end());
  if (order == 2) {
    dof_coords_.reserve(ndofs * d);
    for (std::size_t e = 0; e < edges_.edges.size(); ++e) {
      for (int k = 0; k < d; ++k) {
        dof_coords_.push_back(0.5 * (m.point(edges_.edges[e][0])[k] + m.point(edges_.edges[e][1])[k]));
      }
      dirichlet_.push_back(edges_.on_boundary[e]);
    }
  }
  if (!eliminate_dirichlet) std::fill(dirichlet_.begin(), dirichlet_.end(), 0);

  const std::size_t nc = m.num_cells();
  cell_dofs_.resize(nc * dofs_per_cell_);
  const auto ne = mesh::local_edges(d).size();
  for (std::size_t c = 0; c < nc; ++c) {
    const auto cell = m.cell(c);
    for (int j = 0; j <= d; ++j) cell_dofs_[c * dofs_per_cell_ + j] = cell[j];
    if (order == 2) {
      for (std::size_t e = 0; e < ne; ++e) {
        cell_dofs_[c * dofs_per_cell_ + d + 1 + e] = static_cast<std::uint32_t>(nv + edges_.cell_edges[c * ne + e]);
      }
    }
  }
  free_index_.assign(ndofs, -1);
  for (std::size_t i = 0; i < ndofs; ++i) {
    if (!dirichlet_[i]) {
      free_index_[i] = static_cast<std::int64_t>(free_dofs_.size());
      free_dofs_.push_back(static_cast<std::uint32_t>(i));
    }
  }
  pattern_ = build_pattern(*this);
}

FeSpace build_space(std::shared_ptr<const mesh::Mesh> mesh, int order) { return FeSpace(std::move(mesh), order); }

SparseOperator assemble_mass(const FeSpace& space) {
  const auto& t = tensors(space.dim(), space.order());
  return assemble(space, [&](std::size_t c, std::vector<double>& local) {
    const auto g = geometry(space.mesh(), c);
    for (int i = 0; i < t.nb * t.nb; ++i) local[i] = g.volume * t.mass[i];
  });
}

SparseOperator assemble_stiffness(const FeSpace& space) {
  const auto& t = tensors(space.dim(), space.order());
  const int d = space.dim();
  return assemble(space, [&](std::size_t c, std::vector<double>& local) {
    const auto g = geometry(space.mesh(), c);
    std::array<double, 16> gg{};
    for (int k = 0; k < t.nl; ++k) {
      for (int l = 0; l < t.nl; ++l) {
        double s = 0.0;
        for (int x = 0; x < d; ++x) s += g.grad[k][x] * g.grad[l][x];
        gg[k * t.nl + l] = s;
      }
    }
    for (int i = 0; i < t.nb; ++i) {
      for (int j = 0; j < t.nb; ++j) {
        const double* st = &t.stiff[(i * t.nb + j) * t.nl * t.nl];
        double s = 0.0;
        for (int kl = 0; kl < t.nl * t.nl; ++kl) s += gg[kl] * st[kl];
        local[i * t.nb + j] = g.volume * s;
      }
    }
  });
}

void shape_values(int dim, int order, std::span<const double> bary, std::span<double> out) {
  for (int i = 0; i <= dim; ++i) out[i] = order == 1 ? bary[i] : bary[i] * (2.0 * bary[i] - 1.0);
  if (order == 2) {
    const auto le = mesh::local_edges(dim);
    for (std::size_t e = 0; e < le.size(); ++e) out[dim + 1 + e] = 4.0 * bary[le[e][0]] * bary[le[e][1]];
  }
}

std::vector<double> assemble_load(const FeSpace& space, const ScalarField& f, int quad_order) {
  const auto rule = quadrature::simplex_rule(space.dim(), quad_order);
  const int nb = space.dofs_per_cell();
  const int nl = space.dim() + 1;
  std::vector<double> phi(rule.size() * nb);
  for (std::size_t q = 0; q < rule.size(); ++q) {
    shape_values(space.dim(), space.order(), {rule.barycentric.data() + q * nl, static_cast<std::size_t>(nl)},
                 {phi.data() + q * nb, static_cast<std::size_t>(nb)});
  }
  std::vector<double> load(space.n(), 0.0);
  std::vector<double> local(nb);
  const auto& m = space.mesh();
  for (std::size_t c = 0; c < m.num_cells(); ++c) {
    const double vol = geometry(m, c).volume;
    std::fill(local.begin(), local.end(), 0.0);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const auto x = bary_to_point(m, c, {rule.barycentric.data() + q * nl, static_cast<std::size_t>(nl)});
      const double fx = f(std::span<const double>(x.data(), static_cast<std::size_t>(m.dim)));
      if (!std::isfinite(fx)) {
        throw DataError("assemble_load: right-hand side is not finite at a quadrature point of cell " +
                        std::to_string(c));
      }
      const double w = rule.weights[q] * vol * fx;
      for (int a = 0; a < nb; ++a) local[a] += w * phi[q * nb + a];
    }
    const auto dofs = space.cell_dofs(c);
    for (int a = 0; a < nb; ++a) {
      const auto fi = space.free_index(dofs[a]);
      if (fi >= 0) load[fi] += local[a];
    }
  }
  return load;
}

SparseOperator build_prolongation(const FeSpace& coarse, const FeSpace& fine) {
  const auto& cm = coarse.mesh();
  const auto& fm = fine.mesh();
  const std::size_t nchild = cm.dim == 2 ? 4 : 8;
  if (coarse.order() != fine.order() || cm.dim != fm.dim || cm.domain != fm.domain ||
      fm.parent_cell.size() != fm.num_cells() || fm.num_cells() != nchild * cm.num_cells() ||
      fm.vertex_parents.size() != fm.num_vertices()) {
    throw ConfigurationError("build_prolongation: fine space is not the uniform refinement of the coarse space");
  }
  for (std::size_t c = 0; c < fm.num_cells(); ++c) {
    if (fm.parent_cell[c] != c / nchild) {
      throw ConfigurationError("build_prolongation: fine space is not the uniform refinement of the coarse space");
    }
  }
  const std::size_t cnv = cm.num_vertices();
  const std::size_t fnv = fm.num_vertices();
  // (fine dof) -> list of (coarse dof, weight)
  std::vector<std::vector<std::pair<std::uint32_t, double>>> rows(fine.num_dofs());
  for (std::size_t v = 0; v < fnv; ++v) {
    const auto [a, b] = fm.vertex_parents[v];
    if (a >= cnv || b >= cnv) throw ConfigurationError("build_prolongation: vertex parents out of range");
    if (a == b) {
      rows[v].emplace_back(a, 1.0);
    } else if (coarse.order() == 1) {
      rows[v].emplace_back(a, 0.5);
      rows[v].emplace_back(b, 0.5);
    } else {
      const auto& edges = coarse.edges().edges;
      const std::array<Index, 2> key{std::min(a, b), std::max(a, b)};
      const auto it = std::lower_bound(edges.begin(), edges.end(), key);
      if (it == edges.end() || *it != key) throw ConfigurationError("build_prolongation: missing coarse edge");
      rows[v].emplace_back(static_cast<std::uint32_t>(cnv + (it - edges.begin())), 1.0);
    }
  }
  if (coarse.order() == 2) {
    const auto le = mesh::local_edges(fm.dim);
    const int nb = coarse.dofs_per_cell();
    std::vector<std::uint8_t> done(fine.num_dofs(), 0);
    std::vector<double> phi(nb);
    for (std::size_t c = 0; c < fm.num_cells(); ++c) {
      const auto& pat = mesh::child_pattern(fm.dim, fm.child_pattern[c]);
      const auto fdofs = fine.cell_dofs(c);
      const auto cdofs = coarse.cell_dofs(fm.parent_cell[c]);
      for (std::size_t e = 0; e < le.size(); ++e) {
        const auto dof = fdofs[fm.dim + 1 + e];
        if (done[dof]) continue;
        done[dof] = 1;
        std::array<double, 4> bary{};
        for (auto j : {le[e][0], le[e][1]}) {
          bary[pat.vertex[j][0]] += 0.25;
          bary[pat.vertex[j][1]] += 0.25;
        }
        shape_values(fm.dim, 2, bary, phi);
        for (int a = 0; a < nb; ++a) {
          if (std::abs(phi[a]) > 1e-14) rows[dof].emplace_back(cdofs[a], phi[a]);
        }
      }
    }
  }
  auto pat = std::make_shared<CsrPattern>();
  pat->rows = fine.n();
  pat->cols = coarse.n();
  pat->row_ptr.assign(1, 0);
  std::vector<double> values;
  for (auto dof : fine.free_dofs()) {
    auto& r = rows[dof];
    std::sort(r.begin(), r.end());
    for (const auto& [cd, w] : r) {
      const auto ci = coarse.free_index(cd);
      if (ci < 0) continue;
      pat->col.push_back(static_cast<std::uint32_t>(ci));
      values.push_back(w);
    }
    pat->row_ptr.push_back(pat->col.size());
  }
  return SparseOperator(std::move(pat), std::move(values), false);
}

std::vector<double> interpolate(const FeSpace& space, const ScalarField& f) {
  std::vector<double> out(space.n());
  for (std::size_t i = 0; i < space.n(); ++i) out[i] = f(space.dof_point(space.free_dofs()[i]));
  return out;
}

namespace {

template <class Fn>
double integrate_cells(const FeSpace& space, std::span<const double> coeffs, int quad_order, Fn&& integrand) {
  const auto rule = quadrature::simplex_rule(space.dim(), quad_order);
  const int nb = space.dofs_per_cell();
  const int nl = space.dim() + 1;
  std::vector<double> phi(nb);
  const auto& m = space.mesh();
  double total = 0.0;
  for (std::size_t c = 0; c < m.num_cells(); ++c) {
    const double vol = geometry(m, c).volume;
    const auto dofs = space.cell_dofs(c);
    double cell_sum = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const std::span<const double> bary(rule.barycentric.data() + q * nl, static_cast<std::size_t>(nl));
      shape_values(space.dim(), space.order(), bary, phi);
      double u = 0.0;
      for (int a = 0; a < nb; ++a) {
        const auto fi = space.free_index(dofs[a]);
        if (fi >= 0) u += coeffs[fi] * phi[a];
      }
      const auto x = bary_to_point(m, c, bary);
      cell_sum += rule.weights[q] * integrand(u, std::span<const double>(x.data(), static_cast<std::size_t>(m.dim)));
    }
    total += vol * cell_sum;
  }
  return total;
}

}  // namespace

double l2_error(const FeSpace& space, std::span<const double> coeffs, const ScalarField& exact, int quad_order) {
  const double sq = integrate_cells(space, coeffs, quad_order, [&](double u, std::span<const double> x) {
    const double e = u - exact(x);
    return e * e;
  });
  return std::sqrt(sq);
}

double integrate(const FeSpace& space, std::span<const double> coeffs, int quad_order) {
  return integrate_cells(space, coeffs, quad_order, [](double u, std::span<const double>) { return u; });
}

void write_coo(const SparseOperator& op, std::ostream& out) {
  const auto& p = op.pattern();
  out.precision(17);
  for (std::size_t i = 0; i < p.rows; ++i) {
    for (std::size_t k = p.row_ptr[i]; k < p.row_ptr[i + 1]; ++k) {
      out << i << ' ' << p.col[k] << ' ' << op.values()[k] << '\n';
    }
  }
}

}  // namespace fracpoisson::fem
