#include "fracpoisson/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "fracpoisson/errors.hpp"

namespace fracpoisson::mesh {

namespace {

constexpr std::array<std::array<std::uint8_t, 2>, 3> kTriEdges{{{0, 1}, {1, 2}, {0, 2}}};
constexpr std::array<std::array<std::uint8_t, 2>, 6> kTetEdges{
    {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};

using Pair = std::array<std::uint8_t, 2>;

constexpr Pair mid(std::uint8_t a, std::uint8_t b) { return {a, b}; }
constexpr Pair corner(std::uint8_t a) { return {a, a}; }

const std::array<ChildPattern, 4> kTriPatterns{{
    {{corner(0), mid(0, 1), mid(0, 2), corner(0)}},
    {{mid(0, 1), corner(1), mid(1, 2), corner(0)}},
    {{mid(0, 2), mid(1, 2), corner(2), corner(0)}},
    {{mid(0, 1), mid(1, 2), mid(0, 2), corner(0)}},
}};

double det3(const std::array<std::array<double, 3>, 3>& m) {
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
         m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

// Tet children: 4 corners, then for each of the three octahedron diagonals the
// four tets around it, oriented positively on the reference tetrahedron.
std::array<ChildPattern, 16> make_tet_patterns() {
  std::array<ChildPattern, 16> out{};
  out[0] = {{corner(0), mid(0, 1), mid(0, 2), mid(0, 3)}};
  out[1] = {{mid(0, 1), corner(1), mid(1, 2), mid(1, 3)}};
  out[2] = {{mid(0, 2), mid(1, 2), corner(2), mid(2, 3)}};
  out[3] = {{mid(0, 3), mid(1, 3), mid(2, 3), corner(3)}};
  const std::array<std::array<Pair, 6>, 3> diagonals{{
      {mid(0, 2), mid(1, 3), mid(0, 1), mid(1, 2), mid(2, 3), mid(0, 3)},
      {mid(0, 1), mid(2, 3), mid(0, 2), mid(0, 3), mid(1, 3), mid(1, 2)},
      {mid(0, 3), mid(1, 2), mid(0, 1), mid(0, 2), mid(2, 3), mid(1, 3)},
  }};
  const double ref[4][3] = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  auto position = [&](Pair p) {
    std::array<double, 3> x{};
    for (int k = 0; k < 3; ++k) x[k] = 0.5 * (ref[p[0]][k] + ref[p[1]][k]);
    return x;
  };
  for (int d = 0; d < 3; ++d) {
    const auto& g = diagonals[d];
    for (int i = 0; i < 4; ++i) {
      ChildPattern child{{g[0], g[1], g[2 + i], g[2 + (i + 1) % 4]}};
      std::array<std::array<double, 3>, 3> m{};
      const auto x0 = position(child.vertex[0]);
      for (int r = 0; r < 3; ++r) {
        const auto xr = position(child.vertex[r + 1]);
        for (int k = 0; k < 3; ++k) m[r][k] = xr[k] - x0[k];
      }
      if (det3(m) < 0.0) std::swap(child.vertex[2], child.vertex[3]);
      out[4 + 4 * d + i] = child;
    }
  }
  return out;
}

const std::array<ChildPattern, 16> kTetPatterns = make_tet_patterns();

struct Facet {
  std::array<Index, 3> key;
  Index cell;
  std::uint8_t opposite;
};

// Facets with exactly one adjacent cell, as (cell, opposite local vertex).
std::vector<std::pair<Index, std::uint8_t>> boundary_facets(const Mesh& mesh) {
  const int nv = mesh.vertices_per_cell();
  std::vector<Facet> facets;
  facets.reserve(mesh.num_cells() * static_cast<std::size_t>(nv));
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const auto cell = mesh.cell(c);
    for (int o = 0; o < nv; ++o) {
      Facet f{{0, 0, 0}, static_cast<Index>(c), static_cast<std::uint8_t>(o)};
      int k = 0;
      for (int j = 0; j < nv; ++j) {
        if (j != o) f.key[k++] = cell[j];
      }
      std::sort(f.key.begin(), f.key.begin() + k);
      facets.push_back(f);
    }
  }
  std::sort(facets.begin(), facets.end(), [](const Facet& a, const Facet& b) { return a.key < b.key; });
  std::vector<std::pair<Index, std::uint8_t>> out;
  for (std::size_t i = 0; i < facets.size();) {
    std::size_t j = i + 1;
    while (j < facets.size() && facets[j].key == facets[i].key) ++j;
    if (j - i == 1) out.emplace_back(facets[i].cell, facets[i].opposite);
    i = j;
  }
  return out;
}

void mark_boundary_vertices(Mesh& mesh) {
  mesh.boundary.assign(mesh.num_vertices(), 0);
  for (auto [c, o] : boundary_facets(mesh)) {
    const auto cell = mesh.cell(c);
    for (int j = 0; j < mesh.vertices_per_cell(); ++j) {
      if (j != o) mesh.boundary[cell[j]] = 1;
    }
  }
}

void orient_positive(Mesh& mesh) {
  const int nv = mesh.vertices_per_cell();
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    if (signed_volume(mesh, c) < 0.0) {
      std::swap(mesh.cells[c * nv + nv - 2], mesh.cells[c * nv + nv - 1]);
    }
  }
}

Mesh build_disc(int base_resolution) {
  Mesh m;
  m.dim = 2;
  m.domain = Domain::disc;
  const int rings = base_resolution + 1;
  std::vector<Index> ring_start{0};
  m.coords = {0.0, 0.0};
  for (int j = 1; j <= rings; ++j) {
    ring_start.push_back(static_cast<Index>(m.coords.size() / 2));
    const int count = 6 * j;
    const double radius = static_cast<double>(j) / rings;
    for (int i = 0; i < count; ++i) {
      const double t = 2.0 * std::numbers::pi * i / count;
      m.coords.push_back(radius * std::cos(t));
      m.coords.push_back(radius * std::sin(t));
    }
  }
  for (int i = 0; i < 6; ++i) {
    m.cells.insert(m.cells.end(), {0, ring_start[1] + i, ring_start[1] + (i + 1) % 6});
  }
  for (int j = 2; j <= rings; ++j) {
    const int n1 = 6 * (j - 1);
    const int n2 = 6 * j;
    const Index s1 = ring_start[j - 1];
    const Index s2 = ring_start[j];
    int a = 0;
    int b = 0;
    while (a < n1 || b < n2) {
      const double next_inner = static_cast<double>(a + 1) / n1;
      const double next_outer = static_cast<double>(b + 1) / n2;
      if (a < n1 && (b == n2 || next_inner < next_outer)) {
        m.cells.insert(m.cells.end(), {s1 + a, s2 + b % n2, s1 + (a + 1) % n1});
        ++a;
      } else {
        m.cells.insert(m.cells.end(), {s1 + a % n1, s2 + b, s2 + (b + 1) % n2});
        ++b;
      }
    }
  }
  orient_positive(m);
  mark_boundary_vertices(m);
  return m;
}

Mesh build_square(int n) {
  Mesh m;
  m.dim = 2;
  m.domain = Domain::square;
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      m.coords.push_back(static_cast<double>(i) / n);
      m.coords.push_back(static_cast<double>(j) / n);
    }
  }
  auto id = [n](int i, int j) { return static_cast<Index>(j * (n + 1) + i); };
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      m.cells.insert(m.cells.end(), {id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      m.cells.insert(m.cells.end(), {id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  mark_boundary_vertices(m);
  return m;
}

Mesh build_cube(int n) {
  Mesh m;
  m.dim = 3;
  m.domain = Domain::cube;
  for (int k = 0; k <= n; ++k) {
    for (int j = 0; j <= n; ++j) {
      for (int i = 0; i <= n; ++i) {
        m.coords.insert(m.coords.end(), {static_cast<double>(i) / n, static_cast<double>(j) / n,
                                         static_cast<double>(k) / n});
      }
    }
  }
  auto id = [n](std::array<int, 3> p) {
    return static_cast<Index>((p[2] * (n + 1) + p[1]) * (n + 1) + p[0]);
  };
  std::array<int, 3> perm{0, 1, 2};
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        std::sort(perm.begin(), perm.end());
        do {
          std::array<int, 3> p{i, j, k};
          std::array<Index, 4> tet{};
          tet[0] = id(p);
          for (int step = 0; step < 3; ++step) {
            ++p[perm[step]];
            tet[step + 1] = id(p);
          }
          m.cells.insert(m.cells.end(), tet.begin(), tet.end());
        } while (std::next_permutation(perm.begin(), perm.end()));
      }
    }
  }
  orient_positive(m);
  mark_boundary_vertices(m);
  return m;
}

double dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

}  // namespace

Domain parse_domain(std::string_view name) {
  if (name == "disc") return Domain::disc;
  if (name == "square") return Domain::square;
  if (name == "cube") return Domain::cube;
  throw ConfigurationError("unknown domain '" + std::string(name) + "' (expected disc, square or cube)");
}

std::string to_string(Domain domain) {
  switch (domain) {
    case Domain::disc: return "disc";
    case Domain::square: return "square";
    case Domain::cube: return "cube";
  }
  throw ConfigurationError("unknown domain tag");
}

int dimension(Domain domain) { return domain == Domain::cube ? 3 : 2; }

double domain_measure(Domain domain) { return domain == Domain::disc ? std::numbers::pi : 1.0; }

const ChildPattern& child_pattern(int dim, std::uint8_t id) {
  return dim == 2 ? kTriPatterns.at(id) : kTetPatterns.at(id);
}

std::span<const std::array<std::uint8_t, 2>> local_edges(int dim) {
  if (dim == 2) return kTriEdges;
  return kTetEdges;
}

EdgeTable build_edges(const Mesh& mesh) {
  const auto le = local_edges(mesh.dim);
  const std::size_t per = le.size();
  const std::size_t nc = mesh.num_cells();
  struct Item {
    std::array<Index, 2> key;
    std::size_t slot;
  };
  std::vector<Item> items(nc * per);
  for (std::size_t c = 0; c < nc; ++c) {
    const auto cell = mesh.cell(c);
    for (std::size_t e = 0; e < per; ++e) {
      Index a = cell[le[e][0]];
      Index b = cell[le[e][1]];
      if (a > b) std::swap(a, b);
      items[c * per + e] = {{a, b}, c * per + e};
    }
  }
  std::sort(items.begin(), items.end(), [](const Item& x, const Item& y) {
    return x.key < y.key || (x.key == y.key && x.slot < y.slot);
  });
  EdgeTable t;
  t.cell_edges.resize(nc * per);
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i == 0 || items[i].key != items[i - 1].key) t.edges.push_back(items[i].key);
    t.cell_edges[items[i].slot] = static_cast<Index>(t.edges.size() - 1);
  }
  t.on_boundary.assign(t.edges.size(), 0);
  for (auto [c, o] : boundary_facets(mesh)) {
    for (std::size_t e = 0; e < per; ++e) {
      if (le[e][0] != o && le[e][1] != o) t.on_boundary[t.cell_edges[c * per + e]] = 1;
    }
  }
  return t;
}

double signed_volume(const Mesh& mesh, std::size_t c) {
  const auto cell = mesh.cell(c);
  const auto p0 = mesh.point(cell[0]);
  if (mesh.dim == 2) {
    const auto p1 = mesh.point(cell[1]);
    const auto p2 = mesh.point(cell[2]);
    return 0.5 * ((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p1[1] - p0[1]) * (p2[0] - p0[0]));
  }
  std::array<std::array<double, 3>, 3> m{};
  for (int r = 0; r < 3; ++r) {
    const auto pr = mesh.point(cell[r + 1]);
    for (int k = 0; k < 3; ++k) m[r][k] = pr[k] - p0[k];
  }
  return det3(m) / 6.0;
}

double cell_diameter(const Mesh& mesh, std::size_t c) {
  const auto cell = mesh.cell(c);
  double h = 0.0;
  for (auto e : local_edges(mesh.dim)) h = std::max(h, dist(mesh.point(cell[e[0]]), mesh.point(cell[e[1]])));
  return h;
}

double shape_ratio(const Mesh& mesh, std::size_t c) {
  const auto cell = mesh.cell(c);
  const double vol = std::abs(signed_volume(mesh, c));
  if (mesh.dim == 2) {
    const double a = dist(mesh.point(cell[0]), mesh.point(cell[1]));
    const double b = dist(mesh.point(cell[1]), mesh.point(cell[2]));
    const double d = dist(mesh.point(cell[0]), mesh.point(cell[2]));
    const double circum = a * b * d / (4.0 * vol);
    const double in = 2.0 * vol / (a + b + d);
    return circum / in;
  }
  std::array<std::array<double, 3>, 4> p{};
  for (int j = 0; j < 4; ++j) {
    for (int k = 0; k < 3; ++k) p[j][k] = mesh.point(cell[j])[k];
  }
  double faces = 0.0;
  for (int o = 0; o < 4; ++o) {
    std::array<std::array<double, 3>, 3> f{};
    int n = 0;
    for (int j = 0; j < 4; ++j) {
      if (j != o) f[n++] = p[j];
    }
    const std::array<double, 3> u{f[1][0] - f[0][0], f[1][1] - f[0][1], f[1][2] - f[0][2]};
    const std::array<double, 3> v{f[2][0] - f[0][0], f[2][1] - f[0][1], f[2][2] - f[0][2]};
    const double cx = u[1] * v[2] - u[2] * v[1];
    const double cy = u[2] * v[0] - u[0] * v[2];
    const double cz = u[0] * v[1] - u[1] * v[0];
    faces += 0.5 * std::sqrt(cx * cx + cy * cy + cz * cz);
  }
  const double in = 3.0 * vol / faces;
  // circumcenter x solves 2 (p_i - p_0) . x = |p_i|^2 - |p_0|^2
  std::array<std::array<double, 3>, 3> a{};
  std::array<double, 3> rhs{};
  auto sq = [](const std::array<double, 3>& q) { return q[0] * q[0] + q[1] * q[1] + q[2] * q[2]; };
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 3; ++k) a[i][k] = 2.0 * (p[i + 1][k] - p[0][k]);
    rhs[i] = sq(p[i + 1]) - sq(p[0]);
  }
  const double det = det3(a);
  std::array<double, 3> x{};
  for (int k = 0; k < 3; ++k) {
    auto ak = a;
    for (int i = 0; i < 3; ++i) ak[i][k] = rhs[i];
    x[k] = det3(ak) / det;
  }
  const double circum = std::sqrt((x[0] - p[0][0]) * (x[0] - p[0][0]) + (x[1] - p[0][1]) * (x[1] - p[0][1]) +
                                  (x[2] - p[0][2]) * (x[2] - p[0][2]));
  return circum / in;
}

double mesh_size(const Mesh& mesh) {
  double h = 0.0;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) h = std::max(h, cell_diameter(mesh, c));
  return h;
}

double min_cell_diameter(const Mesh& mesh) {
  double h = INFINITY;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) h = std::min(h, cell_diameter(mesh, c));
  return h;
}

double total_volume(const Mesh& mesh) {
  double v = 0.0;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) v += signed_volume(mesh, c);
  return v;
}

Mesh build_initial(Domain domain, int base_resolution) {
  if (base_resolution < 1) throw ConfigurationError("base_resolution must be at least 1");
  switch (domain) {
    case Domain::disc: return build_disc(base_resolution);
    case Domain::square: return build_square(base_resolution);
    case Domain::cube: return build_cube(base_resolution);
  }
  throw ConfigurationError("unknown domain tag");
}

Mesh refine_uniform(const Mesh& mesh) {
  const int dim = mesh.dim;
  const int nvc = dim + 1;
  const auto edges = build_edges(mesh);
  const auto le = local_edges(dim);
  const std::size_t nv0 = mesh.num_vertices();

  Mesh fine;
  fine.dim = dim;
  fine.domain = mesh.domain;
  fine.coords = mesh.coords;
  fine.coords.reserve((nv0 + edges.edges.size()) * dim);
  fine.boundary = mesh.boundary;
  fine.vertex_parents.reserve(nv0 + edges.edges.size());
  for (std::size_t v = 0; v < nv0; ++v) {
    fine.vertex_parents.push_back({static_cast<Index>(v), static_cast<Index>(v)});
  }
  for (std::size_t e = 0; e < edges.edges.size(); ++e) {
    const auto [a, b] = edges.edges[e];
    std::array<double, 3> x{};
    for (int k = 0; k < dim; ++k) x[k] = 0.5 * (mesh.point(a)[k] + mesh.point(b)[k]);
    if (mesh.domain == Domain::disc && edges.on_boundary[e]) {
      const double r = std::hypot(x[0], x[1]);
      x[0] /= r;
      x[1] /= r;
    }
    fine.coords.insert(fine.coords.end(), x.begin(), x.begin() + dim);
    fine.boundary.push_back(edges.on_boundary[e]);
    fine.vertex_parents.push_back({a, b});
  }

  const std::size_t nchild = dim == 2 ? 4 : 8;
  fine.cells.reserve(mesh.num_cells() * nchild * nvc);
  fine.parent_cell.reserve(mesh.num_cells() * nchild);
  fine.child_pattern.reserve(mesh.num_cells() * nchild);
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const auto cell = mesh.cell(c);
    auto global = [&](std::array<std::uint8_t, 2> p) -> Index {
      if (p[0] == p[1]) return cell[p[0]];
      for (std::size_t e = 0; e < le.size(); ++e) {
        if ((le[e][0] == p[0] && le[e][1] == p[1]) || (le[e][0] == p[1] && le[e][1] == p[0])) {
          return static_cast<Index>(nv0 + edges.cell_edges[c * le.size() + e]);
        }
      }
      throw Error("refine_uniform: bad child pattern");
    };
    std::vector<std::uint8_t> ids;
    if (dim == 2) {
      ids = {0, 1, 2, 3};
    } else {
      const std::array<std::array<Pair, 2>, 3> diagonals{{
          {mid(0, 2), mid(1, 3)}, {mid(0, 1), mid(2, 3)}, {mid(0, 3), mid(1, 2)}}};
      std::array<double, 3> len{};
      for (int d = 0; d < 3; ++d) {
        len[d] = dist(fine.point(global(diagonals[d][0])), fine.point(global(diagonals[d][1])));
      }
      const double shortest = *std::min_element(len.begin(), len.end());
      int choice = 0;
      while (len[choice] > shortest * (1.0 + 1e-12)) ++choice;
      ids = {0, 1, 2, 3};
      for (int i = 0; i < 4; ++i) ids.push_back(static_cast<std::uint8_t>(4 + 4 * choice + i));
    }
    for (auto id : ids) {
      const auto& pat = child_pattern(dim, id);
      for (int j = 0; j < nvc; ++j) fine.cells.push_back(global(pat.vertex[j]));
      fine.parent_cell.push_back(static_cast<Index>(c));
      fine.child_pattern.push_back(id);
    }
  }
  return fine;
}

MeshHierarchy::MeshHierarchy(Domain domain, int base_resolution) : domain_(domain) {
  auto base = std::make_shared<const Mesh>(build_initial(domain, base_resolution));
  h_.push_back(mesh_size(*base));
  levels_.push_back(std::move(base));
}

void MeshHierarchy::extend_to(int level) {
  while (finest() < level) {
    auto next = std::make_shared<const Mesh>(refine_uniform(*levels_.back()));
    h_.push_back(mesh_size(*next));
    levels_.push_back(std::move(next));
  }
}

void write_mesh(const Mesh& mesh, std::ostream& out) {
  out << mesh.dim << ' ' << mesh.num_vertices() << ' ' << mesh.num_cells() << '\n';
  out.precision(17);
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
    const auto p = mesh.point(v);
    for (int k = 0; k < mesh.dim; ++k) out << (k ? " " : "") << p[k];
    out << '\n';
  }
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const auto cell = mesh.cell(c);
    for (int j = 0; j <= mesh.dim; ++j) out << (j ? " " : "") << cell[j];
    out << '\n';
  }
}

}  // namespace fracpoisson::mesh
