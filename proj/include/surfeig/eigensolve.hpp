#pragma once

#include <string>

#include <Eigen/Dense>

#include "surfeig/sparse.hpp"

namespace surfeig {

enum class SolverMethod { Dense, Iterative, Auto };

/// Smallest eigenpairs of A x = lambda B x in ascending order, columns of
/// `vectors` B-orthonormal.
struct EigenPairs {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
  Eigen::VectorXd residuals;  ///< |A x - lambda B x| / |A x|
  std::string method;
  int iterations = 0;

  int size() const noexcept { return static_cast<int>(values.size()); }
};

struct SolveOptions {
  SolverMethod method = SolverMethod::Auto;
  double tol = 1e-10;
  int max_iterations = 400;
  int block_size = 0;       ///< 0 picks max(2m, m + 6)
  int dense_limit = 3000;   ///< auto switches to dense at or below this size
  unsigned seed = 20240607;
};

EigenPairs solve_smallest(const SparseMatrix& A, const SparseMatrix& B, int m, const SolveOptions& options = {});

/// Complete eigenbasis by the dense path.
EigenPairs full_spectrum(const SparseMatrix& A, const SparseMatrix& B);
EigenPairs full_spectrum(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

/// Dense generalized solve keeping the m smallest pairs.
EigenPairs dense_smallest(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, int m);

SolverMethod parse_solver_method(const std::string& name);

}  // namespace surfeig
