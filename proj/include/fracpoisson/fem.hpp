#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "fracpoisson/mesh.hpp"

namespace fracpoisson::fem {

using ScalarField = std::function<double(std::span<const double>)>;

struct CsrPattern {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::size_t> row_ptr;
  std::vector<std::uint32_t> col;
  std::size_t nnz() const noexcept { return col.size(); }
};

class SparseOperator {
 public:
  SparseOperator() = default;
  SparseOperator(std::shared_ptr<const CsrPattern> pattern, std::vector<double> values, bool symmetric);

  std::size_t rows() const noexcept { return pattern_ ? pattern_->rows : 0; }
  std::size_t cols() const noexcept { return pattern_ ? pattern_->cols : 0; }
  bool symmetric() const noexcept { return symmetric_; }
  const CsrPattern& pattern() const { return *pattern_; }
  const std::shared_ptr<const CsrPattern>& pattern_ptr() const noexcept { return pattern_; }
  std::span<const double> values() const noexcept { return values_; }

  void apply(std::span<const double> x, std::span<double> y) const;            // y = A x
  void apply_transpose(std::span<const double> x, std::span<double> y) const;  // y = A^T x
  double entry(std::size_t i, std::size_t j) const;
  std::vector<double> diagonal() const;
  double max_abs() const;

 private:
  std::shared_ptr<const CsrPattern> pattern_;
  std::vector<double> values_;
  bool symmetric_ = false;
};

// y = sigma * M x + S x for operators sharing one pattern.
void apply_shifted(const SparseOperator& mass, const SparseOperator& stiffness, double sigma,
                   std::span<const double> x, std::span<double> y);

// sigma * M + S as one operator; the two must share a pattern.
SparseOperator shifted_operator(const SparseOperator& mass, const SparseOperator& stiffness, double sigma);

class FeSpace {
 public:
  FeSpace(std::shared_ptr<const mesh::Mesh> mesh, int order, bool eliminate_dirichlet = true);

  const mesh::Mesh& mesh() const noexcept { return *mesh_; }
  const std::shared_ptr<const mesh::Mesh>& mesh_ptr() const noexcept { return mesh_; }
  int order() const noexcept { return order_; }
  int dim() const noexcept { return mesh_->dim; }
  std::size_t num_dofs() const noexcept { return dirichlet_.size(); }
  std::size_t n() const noexcept { return free_dofs_.size(); }
  int dofs_per_cell() const noexcept { return dofs_per_cell_; }

  std::span<const std::uint32_t> cell_dofs(std::size_t c) const {
    return {cell_dofs_.data() + c * dofs_per_cell_, static_cast<std::size_t>(dofs_per_cell_)};
  }
  std::span<const double> dof_point(std::size_t i) const {
    return {dof_coords_.data() + i * static_cast<std::size_t>(dim()), static_cast<std::size_t>(dim())};
  }
  bool is_dirichlet(std::size_t i) const { return dirichlet_[i] != 0; }
  std::span<const std::uint32_t> free_dofs() const noexcept { return free_dofs_; }
  // position among free dofs, or -1 for a Dirichlet dof
  std::int64_t free_index(std::size_t i) const { return free_index_[i]; }
  const mesh::EdgeTable& edges() const noexcept { return edges_; }
  const std::shared_ptr<const CsrPattern>& pattern() const noexcept { return pattern_; }

 private:
  std::shared_ptr<const mesh::Mesh> mesh_;
  int order_;
  int dofs_per_cell_;
  mesh::EdgeTable edges_;
  std::vector<std::uint32_t> cell_dofs_;
  std::vector<double> dof_coords_;
  std::vector<std::uint8_t> dirichlet_;
  std::vector<std::uint32_t> free_dofs_;
  std::vector<std::int64_t> free_index_;
  std::shared_ptr<const CsrPattern> pattern_;
};

FeSpace build_space(std::shared_ptr<const mesh::Mesh> mesh, int order);

SparseOperator assemble_mass(const FeSpace& space);
SparseOperator assemble_stiffness(const FeSpace& space);
std::vector<double> assemble_load(const FeSpace& space, const ScalarField& f, int quad_order);
SparseOperator build_prolongation(const FeSpace& coarse, const FeSpace& fine);

// Local shape functions at a barycentric point, in cell dof order.
void shape_values(int dim, int order, std::span<const double> bary, std::span<double> out);

std::vector<double> interpolate(const FeSpace& space, const ScalarField& f);
double l2_error(const FeSpace& space, std::span<const double> coeffs, const ScalarField& exact, int quad_order);
double integrate(const FeSpace& space, std::span<const double> coeffs, int quad_order);

void write_coo(const SparseOperator& op, std::ostream& out);

}  // namespace fracpoisson::fem
