#pragma once

#include <vector>

#include "surfeig/lagrange.hpp"

namespace surfeig {

/// Quadrature on the reference triangle. Weights are positive and sum to 1/2.
struct QuadratureRule {
  std::vector<RefPoint> points;
  std::vector<double> weights;
  int degree = 0;  ///< polynomials up to this total degree are integrated exactly

  int size() const noexcept { return static_cast<int>(points.size()); }
};

/// Gauss-Legendre nodes and weights on [0, 1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

/// Collapsed (Duffy) tensor Gauss-Legendre rule exact up to `degree`.
QuadratureRule triangle_rule(int degree);

}  // namespace surfeig
