#pragma once

#include <functional>

#include <Eigen/Dense>

#include "surfeig/geometry.hpp"
#include "surfeig/lagrange.hpp"
#include "surfeig/mesh.hpp"
#include "surfeig/sparse.hpp"

namespace surfeig {

/// Continuous degree-k vector Lagrange space on Gamma_h. Vector dofs are
/// blocked by component: dof(c, s) = c * num_scalar_dofs() + s.
struct FeSpace {
  LagrangeBasis basis;
  LagrangeDofMap dofs;
  int geometry_degree = 1;
  double h = 0.0;  ///< mesh size of the underlying flat triangulation

  int degree() const noexcept { return basis.degree(); }
  int num_scalar_dofs() const noexcept { return dofs.num_nodes; }
  int num_dofs() const noexcept { return 3 * dofs.num_nodes; }
  int num_elements() const noexcept { return static_cast<int>(dofs.cell_nodes.size()) / dofs.nodes_per_cell; }
  int dof(int component, int scalar) const noexcept { return component * dofs.num_nodes + scalar; }
};

FeSpace build_space(const LinearSurfaceMesh& mesh, const ParametricMap& map, int k);

struct AssemblyOptions {
  double eta_coeff = 1.0;
  int quad_degree = 0;  ///< 0 selects 2 (k + k_g)
  bool check_spd = true;
};

/// The four parts of the penalized pencil. A = a_tilde + k_a, B = b_tilde + k_b.
struct AssembledForms {
  SparseMatrix a_tilde;
  SparseMatrix k_a;
  SparseMatrix b_tilde;
  SparseMatrix k_b;
  SparseMatrix A;
  SparseMatrix B;
  double eta = 0.0;
  int quad_degree = 0;
};

AssembledForms assemble(const FeSpace& space, const ParametricMap& map, const LevelSetSurface& surface,
                        const AssemblyOptions& options = {});

int default_quad_degree(const FeSpace& space);

using VectorField = std::function<Vec3(const Vec3&)>;

/// Nodal interpolant of u^e = field o p at the Lagrange nodes of Gamma_h.
Eigen::VectorXd interpolate(const VectorField& field, const FeSpace& space, const ParametricMap& map,
                            const LevelSetSurface& surface);

Eigen::VectorXd interpolate(const KillingField& field, const FeSpace& space, const ParametricMap& map,
                            const LevelSetSurface& surface);

/// Forms evaluated with one argument the extended Killing field u^e.
struct ExtendedPairings {
  Eigen::VectorXd r;      ///< d_lambda(u^e, phi_i) = a_vec - lambda b_vec
  double a_ee = 0.0;
  double b_ee = 0.0;
  Eigen::VectorXd a_vec;
  Eigen::VectorXd b_vec;
};

ExtendedPairings extended_pairings(const KillingField& field, double lambda, const FeSpace& space,
                                   const ParametricMap& map, const LevelSetSurface& surface,
                                   const AssembledForms& forms);

}  // namespace surfeig
