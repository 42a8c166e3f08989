#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>

namespace surfeig {

using RefPoint = Eigen::Vector2d;

/// Equispaced Lagrange basis of degree k on the reference triangle
/// {(xi, eta) : xi, eta >= 0, xi + eta <= 1} with vertices (0,0), (1,0), (0,1).
///
/// Node m carries a multi-index (i0, i1, i2), i0 + i1 + i2 = k, located at
/// barycentric coordinates (i0, i1, i2) / k. Ordering: the three vertices,
/// then the interior nodes of edges (v0,v1), (v1,v2), (v2,v0) each running
/// from the first to the second vertex, then the cell interior nodes.
class LagrangeBasis {
public:
  using MultiIndex = std::array<int, 3>;

  explicit LagrangeBasis(int degree);

  int degree() const noexcept { return degree_; }
  int size() const noexcept { return static_cast<int>(nodes_.size()); }

  const MultiIndex& node(int m) const { return nodes_[m]; }
  RefPoint node_point(int m) const;

  void eval(const RefPoint& xi, Eigen::VectorXd& values) const;
  /// values (size()) and gradients (size() x 2) with respect to (xi, eta).
  void eval(const RefPoint& xi, Eigen::VectorXd& values, Eigen::MatrixX2d& grads) const;

private:
  int degree_;
  std::vector<MultiIndex> nodes_;
};

}  // namespace surfeig
