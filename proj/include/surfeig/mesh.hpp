#pragma once

#include <array>
#include <filesystem>
#include <vector>

#include <Eigen/Dense>

#include "surfeig/geometry.hpp"
#include "surfeig/lagrange.hpp"

namespace surfeig {

using Triangle = std::array<int, 3>;
using Edge = std::array<int, 2>;

/// Flat triangulation Gamma^lin. Triangles are oriented so that
/// (v1 - v0) x (v2 - v0) points away from the enclosed volume.
class LinearSurfaceMesh {
public:
  LinearSurfaceMesh(std::vector<Vec3> vertices, std::vector<Triangle> triangles, int level = 0);

  const std::vector<Vec3>& vertices() const noexcept { return vertices_; }
  const std::vector<Triangle>& triangles() const noexcept { return triangles_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  /// Edge ids of triangle t in local order (v0,v1), (v1,v2), (v2,v0).
  const std::array<int, 3>& triangle_edges(int t) const { return tri_edges_[t]; }
  int level() const noexcept { return level_; }

  int num_vertices() const noexcept { return static_cast<int>(vertices_.size()); }
  int num_triangles() const noexcept { return static_cast<int>(triangles_.size()); }
  int num_edges() const noexcept { return static_cast<int>(edges_.size()); }

private:
  std::vector<Vec3> vertices_;
  std::vector<Triangle> triangles_;
  std::vector<Edge> edges_;
  std::vector<std::array<int, 3>> tri_edges_;
  int level_;
};

struct TopologyReport {
  bool closed_manifold = false;   ///< every edge shared by exactly two triangles
  bool consistently_oriented = false;
  int euler_characteristic = 0;
};

TopologyReport check_topology(const LinearSurfaceMesh& mesh);

/// Icosahedron refined `level` times by edge-midpoint subdivision, every
/// vertex projected onto the surface. 20 * 4^level triangles.
LinearSurfaceMesh icosphere(int level, const LevelSetSurface& surface);

inline constexpr int kMaxIcosphereLevel = 7;

/// Maximum edge length of the flat triangulation.
double mesh_size(const LinearSurfaceMesh& mesh);

/// Continuous numbering of the degree-k equispaced Lagrange nodes of a mesh:
/// vertices first, then k-1 nodes per edge, then interior nodes per triangle.
struct LagrangeDofMap {
  int degree = 1;
  int num_nodes = 0;
  int nodes_per_cell = 0;
  std::vector<int> cell_nodes;  ///< row-major, num_triangles x nodes_per_cell

  int node(int cell, int local) const { return cell_nodes[static_cast<std::size_t>(cell) * nodes_per_cell + local]; }
};

LagrangeDofMap build_dof_map(const LinearSurfaceMesh& mesh, const LagrangeBasis& basis);

/// Positions of the dof-map nodes on the flat triangulation.
std::vector<Vec3> flat_node_positions(const LinearSurfaceMesh& mesh, const LagrangeDofMap& dofs,
                                      const LagrangeBasis& basis);

/// Per-element Lagrange interpolant of the closest-point projection,
/// L(x) = sum_i p(x_i) phi_i(x), of degree k_g.
class ParametricMap {
public:
  ParametricMap(const LinearSurfaceMesh& mesh, int kg, const LevelSetSurface& surface);

  int degree() const noexcept { return basis_.degree(); }
  const LagrangeBasis& basis() const noexcept { return basis_; }
  const LagrangeDofMap& dof_map() const noexcept { return dofs_; }
  const std::vector<Vec3>& nodes() const noexcept { return nodes_; }
  int num_elements() const noexcept { return static_cast<int>(coeffs_.size()); }
  /// 3 x nodes_per_cell nodal coefficients of element e.
  const Eigen::Matrix3Xd& element_coefficients(int e) const { return coeffs_[e]; }

private:
  LagrangeBasis basis_;
  LagrangeDofMap dofs_;
  std::vector<Vec3> nodes_;
  std::vector<Eigen::Matrix3Xd> coeffs_;
};

inline ParametricMap parametric_lift(const LinearSurfaceMesh& mesh, int kg, const LevelSetSurface& surface) {
  return ParametricMap(mesh, kg, surface);
}

/// Geometry of the curved element at one reference point.
struct GeomFrame {
  Vec3 x;
  Eigen::Matrix<double, 3, 2> J;
  Vec3 n;       ///< unit normal of Gamma_h
  double mu;    ///< area factor sqrt(det(J^T J))
};

GeomFrame geom_frame(const ParametricMap& map, int element, const RefPoint& ref_point);

/// Same as above with geometry basis values and gradients already evaluated.
GeomFrame geom_frame(const Eigen::Matrix3Xd& coeffs, const Eigen::VectorXd& values,
                     const Eigen::MatrixX2d& grads);

double surface_area(const ParametricMap& map, int quad_degree);

/// OFF text export of the flat triangulation.
void write_off(const LinearSurfaceMesh& mesh, const std::filesystem::path& path);

}  // namespace surfeig
