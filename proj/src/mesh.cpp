#include "surfeig/mesh.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "surfeig/errors.hpp"
#include "surfeig/quadrature.hpp"

namespace surfeig {

namespace {

Edge sorted_edge(int a, int b) { return a < b ? Edge{a, b} : Edge{b, a}; }

}  // namespace

LinearSurfaceMesh::LinearSurfaceMesh(std::vector<Vec3> vertices, std::vector<Triangle> triangles, int level)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)), level_(level) {
  const int nv = num_vertices();
  std::map<Edge, int> index;
  tri_edges_.resize(triangles_.size());
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    const auto& tri = triangles_[t];
    for (int c = 0; c < 3; ++c) {
      if (tri[c] < 0 || tri[c] >= nv) throw InputError("triangle references a missing vertex");
    }
    for (int c = 0; c < 3; ++c) {
      const Edge e = sorted_edge(tri[c], tri[(c + 1) % 3]);
      auto [it, inserted] = index.try_emplace(e, static_cast<int>(edges_.size()));
      if (inserted) edges_.push_back(e);
      tri_edges_[t][c] = it->second;
    }
  }
}

TopologyReport check_topology(const LinearSurfaceMesh& mesh) {
  TopologyReport rep;
  std::vector<int> count(mesh.num_edges(), 0);
  // +1 if the triangle traverses the edge from low to high vertex, -1 otherwise
  std::vector<int> direction(mesh.num_edges(), 0);
  rep.consistently_oriented = true;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    for (int c = 0; c < 3; ++c) {
      const int e = mesh.triangle_edges(t)[c];
      ++count[e];
      direction[e] += tri[c] < tri[(c + 1) % 3] ? 1 : -1;
    }
  }
  rep.closed_manifold = true;
  for (int e = 0; e < mesh.num_edges(); ++e) {
    if (count[e] != 2) rep.closed_manifold = false;
    if (direction[e] != 0) rep.consistently_oriented = false;
  }
  rep.euler_characteristic = mesh.num_vertices() - mesh.num_edges() + mesh.num_triangles();
  return rep;
}

LinearSurfaceMesh icosphere(int level, const LevelSetSurface& surface) {
  if (level < 0 || level > kMaxIcosphereLevel) {
    std::ostringstream msg;
    msg << "icosphere level " << level << " outside [0, " << kMaxIcosphereLevel << "]";
    throw InputError(msg.str());
  }
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                         {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  std::vector<Triangle> f = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                             {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                             {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                             {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7}, {9, 8, 1}};
  for (auto& x : v) x = closest_point(surface, x * (surface.radius() / x.norm()));

  for (int l = 0; l < level; ++l) {
    std::map<Edge, int> midpoint;
    auto mid = [&](int a, int b) {
      const Edge e = sorted_edge(a, b);
      auto it = midpoint.find(e);
      if (it != midpoint.end()) return it->second;
      const Vec3 m = 0.5 * (v[a] + v[b]);
      v.push_back(closest_point(surface, m));
      midpoint.emplace(e, static_cast<int>(v.size()) - 1);
      return static_cast<int>(v.size()) - 1;
    };
    std::vector<Triangle> refined;
    refined.reserve(f.size() * 4);
    for (const auto& tri : f) {
      const int a = mid(tri[0], tri[1]);
      const int b = mid(tri[1], tri[2]);
      const int c = mid(tri[2], tri[0]);
      refined.push_back({tri[0], a, c});
      refined.push_back({tri[1], b, a});
      refined.push_back({tri[2], c, b});
      refined.push_back({a, b, c});
    }
    f = std::move(refined);
  }
  return LinearSurfaceMesh(std::move(v), std::move(f), level);
}

double mesh_size(const LinearSurfaceMesh& mesh) {
  double h = 0.0;
  for (const auto& e : mesh.edges()) {
    h = std::max(h, (mesh.vertices()[e[0]] - mesh.vertices()[e[1]]).norm());
  }
  return h;
}

LagrangeDofMap build_dof_map(const LinearSurfaceMesh& mesh, const LagrangeBasis& basis) {
  const int k = basis.degree();
  const int nloc = basis.size();
  const int nint = (k - 1) * (k - 2) / 2;
  const int nv = mesh.num_vertices();
  const int ne = mesh.num_edges();

  LagrangeDofMap map;
  map.degree = k;
  map.nodes_per_cell = nloc;
  map.num_nodes = nv + ne * (k - 1) + mesh.num_triangles() * nint;
  map.cell_nodes.resize(static_cast<std::size_t>(mesh.num_triangles()) * nloc);

  // local edge c joins local vertices c and (c+1)%3
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    int interior = 0;
    for (int m = 0; m < nloc; ++m) {
      const auto& a = basis.node(m);
      int id = -1;
      for (int c = 0; c < 3; ++c) {
        if (a[c] == k) id = tri[c];
      }
      if (id < 0) {
        for (int c = 0; c < 3 && id < 0; ++c) {
          const int d = (c + 1) % 3;
          const int other = (c + 2) % 3;
          if (a[other] != 0) continue;
          const int e = mesh.triangle_edges(t)[c];
          // position counted from the edge's lower vertex
          const int hi_local = tri[c] > tri[d] ? c : d;
          const int s = a[hi_local];
          id = nv + e * (k - 1) + (s - 1);
        }
      }
      if (id < 0) id = nv + ne * (k - 1) + t * nint + interior++;
      map.cell_nodes[static_cast<std::size_t>(t) * nloc + m] = id;
    }
  }
  return map;
}

std::vector<Vec3> flat_node_positions(const LinearSurfaceMesh& mesh, const LagrangeDofMap& dofs,
                                      const LagrangeBasis& basis) {
  std::vector<Vec3> pos(dofs.num_nodes, Vec3::Zero());
  const double k = basis.degree();
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    for (int m = 0; m < basis.size(); ++m) {
      const auto& a = basis.node(m);
      pos[dofs.node(t, m)] = (a[0] / k) * mesh.vertices()[tri[0]] + (a[1] / k) * mesh.vertices()[tri[1]] +
                             (a[2] / k) * mesh.vertices()[tri[2]];
    }
  }
  return pos;
}

ParametricMap::ParametricMap(const LinearSurfaceMesh& mesh, int kg, const LevelSetSurface& surface)
    : basis_([kg] {
        if (kg < 1 || kg > 4) throw InputError("geometry degree k_g must lie in [1, 4]");
        return LagrangeBasis(kg);
      }()),
      dofs_(build_dof_map(mesh, basis_)) {
  const auto flat = flat_node_positions(mesh, dofs_, basis_);
  nodes_.resize(flat.size());
  for (std::size_t i = 0; i < flat.size(); ++i) {
    // vertices of Gamma^lin are kept as they are, so k_g = 1 is the identity
    nodes_[i] = static_cast<int>(i) < mesh.num_vertices() ? flat[i] : closest_point(surface, flat[i]);
  }
  coeffs_.resize(mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    coeffs_[t].resize(3, basis_.size());
    for (int m = 0; m < basis_.size(); ++m) coeffs_[t].col(m) = nodes_[dofs_.node(t, m)];
  }
}

GeomFrame geom_frame(const Eigen::Matrix3Xd& coeffs, const Eigen::VectorXd& values,
                     const Eigen::MatrixX2d& grads) {
  GeomFrame g;
  g.x = coeffs * values;
  g.J = coeffs * grads;
  const Vec3 c = g.J.col(0).cross(g.J.col(1));
  g.mu = c.norm();
  const double scale = g.J.col(0).norm() * g.J.col(1).norm();
  if (!(g.mu > 1e-14 * scale) || !std::isfinite(g.mu)) {
    throw GeometryError("degenerate element Jacobian: det(J^T J) <= 0");
  }
  g.n = c / g.mu;
  return g;
}

GeomFrame geom_frame(const ParametricMap& map, int element, const RefPoint& ref_point) {
  if (element < 0 || element >= map.num_elements()) throw InputError("element index out of range");
  const double tol = 1e-12;
  if (ref_point.x() < -tol || ref_point.y() < -tol || ref_point.sum() > 1.0 + tol) {
    throw InputError("reference point outside the reference triangle");
  }
  Eigen::VectorXd values;
  Eigen::MatrixX2d grads;
  map.basis().eval(ref_point, values, grads);
  return geom_frame(map.element_coefficients(element), values, grads);
}

double surface_area(const ParametricMap& map, int quad_degree) {
  const QuadratureRule rule = triangle_rule(quad_degree);
  std::vector<Eigen::VectorXd> values(rule.size());
  std::vector<Eigen::MatrixX2d> grads(rule.size());
  for (int q = 0; q < rule.size(); ++q) map.basis().eval(rule.points[q], values[q], grads[q]);
  double area = 0.0;
  for (int e = 0; e < map.num_elements(); ++e) {
    double local = 0.0;
    for (int q = 0; q < rule.size(); ++q) {
      local += rule.weights[q] * geom_frame(map.element_coefficients(e), values[q], grads[q]).mu;
    }
    area += local;
  }
  return area;
}

void write_off(const LinearSurfaceMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open " + path.string() + " for writing");
  out.precision(17);
  out << "OFF\n" << mesh.num_vertices() << ' ' << mesh.num_triangles() << " 0\n";
  for (const auto& v : mesh.vertices()) out << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  for (const auto& t : mesh.triangles()) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

}  // namespace surfeig
