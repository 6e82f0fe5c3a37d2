#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fracpoisson::mesh {

enum class Domain { disc, square, cube };

Domain parse_domain(std::string_view name);
std::string to_string(Domain domain);
int dimension(Domain domain);
double domain_measure(Domain domain);

using Index = std::uint32_t;

// Local vertex j of a child cell sits at the midpoint of parent-local vertices
// (a, b); a == b marks a parent corner.
struct ChildPattern {
  std::array<std::array<std::uint8_t, 2>, 4> vertex;
};

struct Mesh {
  int dim = 0;
  Domain domain = Domain::square;
  std::vector<double> coords;
  std::vector<Index> cells;
  std::vector<std::uint8_t> boundary;
  // refinement provenance, empty on a base mesh
  std::vector<Index> parent_cell;
  std::vector<std::uint8_t> child_pattern;
  std::vector<std::array<Index, 2>> vertex_parents;

  std::size_t num_vertices() const noexcept { return coords.size() / static_cast<std::size_t>(dim); }
  std::size_t num_cells() const noexcept { return cells.size() / static_cast<std::size_t>(dim + 1); }
  int vertices_per_cell() const noexcept { return dim + 1; }
  std::span<const double> point(std::size_t v) const {
    return {coords.data() + v * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }
  std::span<const Index> cell(std::size_t c) const {
    return {cells.data() + c * static_cast<std::size_t>(dim + 1), static_cast<std::size_t>(dim + 1)};
  }
  bool is_boundary(std::size_t v) const { return boundary[v] != 0; }
};

const ChildPattern& child_pattern(int dim, std::uint8_t id);

struct EdgeTable {
  std::vector<std::array<Index, 2>> edges;  // sorted endpoint pairs, lexicographic order
  std::vector<Index> cell_edges;            // per cell, in local edge order
  std::vector<std::uint8_t> on_boundary;
};

// Local edge order: triangle (0,1),(1,2),(0,2); tetrahedron (0,1),(0,2),(0,3),(1,2),(1,3),(2,3).
std::span<const std::array<std::uint8_t, 2>> local_edges(int dim);

EdgeTable build_edges(const Mesh& mesh);

double signed_volume(const Mesh& mesh, std::size_t c);
double cell_diameter(const Mesh& mesh, std::size_t c);
double shape_ratio(const Mesh& mesh, std::size_t c);  // circumradius / inradius
double mesh_size(const Mesh& mesh);                   // max cell diameter
double min_cell_diameter(const Mesh& mesh);
double total_volume(const Mesh& mesh);

Mesh build_initial(Domain domain, int base_resolution);
Mesh refine_uniform(const Mesh& mesh);

class MeshHierarchy {
 public:
  MeshHierarchy(Domain domain, int base_resolution = 1);

  void extend_to(int level);
  const Mesh& level(int l) const { return *levels_.at(static_cast<std::size_t>(l)); }
  std::shared_ptr<const Mesh> level_ptr(int l) const { return levels_.at(static_cast<std::size_t>(l)); }
  int finest() const noexcept { return static_cast<int>(levels_.size()) - 1; }
  double h(int l) const { return h_.at(static_cast<std::size_t>(l)); }
  Domain domain() const noexcept { return domain_; }
  double measure() const noexcept { return domain_measure(domain_); }
  int dim() const noexcept { return dimension(domain_); }

 private:
  Domain domain_;
  std::vector<std::shared_ptr<const Mesh>> levels_;
  std::vector<double> h_;
};

void write_mesh(const Mesh& mesh, std::ostream& out);

}  // namespace fracpoisson::mesh
