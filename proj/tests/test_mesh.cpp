#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "fracpoisson/errors.hpp"
#include "fracpoisson/mesh.hpp"

using namespace fracpoisson;
using namespace fracpoisson::mesh;

namespace {

// facet -> number of adjacent cells, computed independently with a map
std::map<std::vector<Index>, int> facet_counts(const Mesh& m) {
  std::map<std::vector<Index>, int> counts;
  for (std::size_t c = 0; c < m.num_cells(); ++c) {
    const auto cell = m.cell(c);
    for (int o = 0; o <= m.dim; ++o) {
      std::vector<Index> f;
      for (int j = 0; j <= m.dim; ++j) {
        if (j != o) f.push_back(cell[j]);
      }
      std::sort(f.begin(), f.end());
      ++counts[f];
    }
  }
  return counts;
}

bool on_geometric_boundary(const Mesh& m, std::size_t v) {
  const auto p = m.point(v);
  if (m.domain == Domain::disc) return std::abs(std::hypot(p[0], p[1]) - 1.0) < 1e-12;
  for (int k = 0; k < m.dim; ++k) {
    if (p[k] == 0.0 || p[k] == 1.0) return true;
  }
  return false;
}

void check_mesh_invariants(const Mesh& m) {
  for (std::size_t c = 0; c < m.num_cells(); ++c) REQUIRE(signed_volume(m, c) > 0.0);
  for (const auto& [facet, count] : facet_counts(m)) {
    REQUIRE((count == 1 || count == 2));
    if (count == 1) {
      for (auto v : facet) REQUIRE(m.is_boundary(v));
    }
  }
  for (std::size_t v = 0; v < m.num_vertices(); ++v) {
    INFO("vertex " << v);
    REQUIRE(m.is_boundary(v) == on_geometric_boundary(m, v));
  }
  double worst = 0.0;
  for (std::size_t c = 0; c < m.num_cells(); ++c) worst = std::max(worst, shape_ratio(m, c));
  CHECK(worst <= 10.0);
  CHECK(mesh_size(m) / min_cell_diameter(m) <= 4.0);
}

}  // namespace

TEST_CASE("domain tags") {
  CHECK(parse_domain("disc") == Domain::disc);
  CHECK(parse_domain("cube") == Domain::cube);
  CHECK(to_string(Domain::square) == "square");
  CHECK_THROWS_AS(parse_domain("annulus"), ConfigurationError);
  CHECK(dimension(Domain::cube) == 3);
  CHECK(domain_measure(Domain::disc) == doctest::Approx(std::numbers::pi));
  CHECK_THROWS_AS(build_initial(Domain::square, 0), ConfigurationError);
}

TEST_CASE("base meshes") {
  const auto sq = build_initial(Domain::square, 1);
  CHECK(sq.num_cells() == 2);
  CHECK(sq.num_vertices() == 4);
  for (std::size_t v = 0; v < 4; ++v) CHECK(sq.is_boundary(v));
  check_mesh_invariants(sq);

  const auto cube = build_initial(Domain::cube, 1);
  CHECK(cube.num_cells() == 6);
  CHECK(cube.num_vertices() == 8);
  CHECK(total_volume(cube) == doctest::Approx(1.0).epsilon(1e-14));
  check_mesh_invariants(cube);

  const auto disc = build_initial(Domain::disc, 1);
  CHECK(std::abs(total_volume(disc) - std::numbers::pi) < 0.05 * std::numbers::pi);
  check_mesh_invariants(disc);

  const auto sq3 = build_initial(Domain::square, 3);
  CHECK(sq3.num_cells() == 18);
  CHECK(total_volume(sq3) == doctest::Approx(1.0));
}

TEST_CASE("square and cube refinement counts") {
  MeshHierarchy sq(Domain::square);
  sq.extend_to(5);
  for (int l = 0; l <= 5; ++l) {
    const auto& m = sq.level(l);
    CHECK(m.num_cells() == 2u * (1u << (2 * l)));
    CHECK(m.num_vertices() == ((1u << l) + 1) * ((1u << l) + 1));
    CHECK(total_volume(m) == doctest::Approx(1.0).epsilon(1e-13));
    check_mesh_invariants(m);
  }
  MeshHierarchy cube(Domain::cube);
  cube.extend_to(3);
  for (int l = 0; l <= 3; ++l) {
    const auto& m = cube.level(l);
    CHECK(m.num_cells() == 6u * (1u << (3 * l)));
    CHECK(m.num_vertices() == ((1u << l) + 1) * ((1u << l) + 1) * ((1u << l) + 1));
    CHECK(total_volume(m) == doctest::Approx(1.0).epsilon(1e-13));
    check_mesh_invariants(m);
  }
}

TEST_CASE("tet refinement keeps a bounded number of shapes") {
  MeshHierarchy cube(Domain::cube);
  cube.extend_to(4);
  double worst = 0.0;
  for (int l = 0; l <= 4; ++l) {
    for (std::size_t c = 0; c < cube.level(l).num_cells(); ++c) worst = std::max(worst, shape_ratio(cube.level(l), c));
  }
  CHECK(worst < 5.0);
}

TEST_CASE("disc refinement") {
  MeshHierarchy disc(Domain::disc);
  disc.extend_to(5);
  double prev_gap = INFINITY;
  const std::size_t expected_vertices[] = {19, 61, 217, 817, 3169, 12481};
  for (int l = 0; l <= 5; ++l) {
    const auto& m = disc.level(l);
    CHECK(m.num_vertices() == expected_vertices[l]);
    const double gap = std::numbers::pi - total_volume(m);
    CHECK(gap > 0.0);
    CHECK(gap < prev_gap);
    prev_gap = gap;
    check_mesh_invariants(m);
    for (std::size_t v = 0; v < m.num_vertices(); ++v) {
      if (m.is_boundary(v)) CHECK(std::abs(std::hypot(m.point(v)[0], m.point(v)[1]) - 1.0) <= 1e-12);
    }
  }
  CHECK(prev_gap < 2e-3);
}

TEST_CASE("hierarchy nesting and mesh sizes") {
  for (auto dom : {Domain::disc, Domain::square, Domain::cube}) {
    MeshHierarchy hier(dom);
    hier.extend_to(dom == Domain::cube ? 3 : 4);
    for (int l = 1; l <= hier.finest(); ++l) {
      const auto& coarse = hier.level(l - 1);
      const auto& fine = hier.level(l);
      for (std::size_t v = 0; v < coarse.num_vertices(); ++v) {
        for (int k = 0; k < coarse.dim; ++k) REQUIRE(fine.point(v)[k] == coarse.point(v)[k]);
        REQUIRE(fine.vertex_parents[v][0] == v);
      }
      const double ratio = hier.h(l - 1) / hier.h(l);
      CHECK(ratio >= 2.0 / 1.2);
      CHECK(ratio <= 2.0 * 1.2);
      REQUIRE(fine.parent_cell.size() == fine.num_cells());
      for (std::size_t c = 0; c < fine.num_cells(); ++c) REQUIRE(fine.parent_cell[c] < coarse.num_cells());
    }
  }
}

TEST_CASE("child patterns reproduce vertex positions on straight meshes") {
  MeshHierarchy sq(Domain::cube);
  sq.extend_to(2);
  const auto& coarse = sq.level(1);
  const auto& fine = sq.level(2);
  for (std::size_t c = 0; c < fine.num_cells(); ++c) {
    const auto& pat = child_pattern(3, fine.child_pattern[c]);
    const auto parent = coarse.cell(fine.parent_cell[c]);
    for (int j = 0; j < 4; ++j) {
      for (int k = 0; k < 3; ++k) {
        const double x = 0.5 * (coarse.point(parent[pat.vertex[j][0]])[k] + coarse.point(parent[pat.vertex[j][1]])[k]);
        REQUIRE(fine.point(fine.cell(c)[j])[k] == doctest::Approx(x).epsilon(1e-15));
      }
    }
  }
}

TEST_CASE("edge table") {
  const auto m = build_initial(Domain::square, 1);
  const auto t = build_edges(m);
  CHECK(t.edges.size() == 5);
  int boundary = 0;
  for (auto b : t.on_boundary) boundary += b;
  CHECK(boundary == 4);
  const auto cube = build_initial(Domain::cube, 1);
  const auto tc = build_edges(cube);
  CHECK(tc.edges.size() == 19);  // 12 cube edges, 6 face diagonals, 1 main diagonal
  int cb = 0;
  for (auto b : tc.on_boundary) cb += b;
  CHECK(cb == 18);
}

TEST_CASE("mesh dump format") {
  const auto m = build_initial(Domain::square, 1);
  std::ostringstream os;
  write_mesh(m, os);
  std::istringstream is(os.str());
  int dim = 0;
  std::size_t nv = 0, nc = 0;
  is >> dim >> nv >> nc;
  CHECK(dim == 2);
  CHECK(nv == 4);
  CHECK(nc == 2);
  double x = 0, y = 0;
  for (std::size_t v = 0; v < nv; ++v) is >> x >> y;
  CHECK(x == 1.0);
  CHECK(y == 1.0);
  Index a = 9, b = 9, c = 9;
  is >> a >> b >> c;
  CHECK(a == 0);
  CHECK(b == 1);
  CHECK(c == 3);
}
