#include "surfeig/eigensolve.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include "surfeig/errors.hpp"

namespace surfeig {

namespace {

using ColSparse = Eigen::SparseMatrix<double>;

constexpr int kDenseSpectrumLimit = 3000;

void check_shapes(Eigen::Index an, Eigen::Index am, Eigen::Index bn, Eigen::Index bm, int m) {
  if (an != am || bn != bm || an != bn) throw InputError("A and B must be square matrices of equal size");
  if (m < 1 || m > an) {
    std::ostringstream msg;
    msg << "requested " << m << " eigenpairs of a pencil of size " << an;
    throw InputError(msg.str());
  }
}

template <class MatA, class MatB>
Eigen::VectorXd relative_residuals(const MatA& A, const MatB& B, const Eigen::VectorXd& values,
                                   const Eigen::MatrixXd& X) {
  const Eigen::MatrixXd AX = A * X;
  const Eigen::MatrixXd BX = B * X;
  Eigen::VectorXd res(values.size());
  for (Eigen::Index j = 0; j < values.size(); ++j) {
    const double scale = AX.col(j).norm();
    const double r = (AX.col(j) - values[j] * BX.col(j)).norm();
    res[j] = scale > 0.0 ? r / scale : r;
  }
  return res;
}

/// B-orthonormal basis of span(V) by eigendecomposition of the Gram matrix,
/// dropping numerically dependent directions.
Eigen::MatrixXd b_orthonormalize(const Eigen::MatrixXd& V, const ColSparse& B) {
  Eigen::MatrixXd W = V;
  for (int pass = 0; pass < 2; ++pass) {
    const Eigen::MatrixXd BW = B * W;
    Eigen::VectorXd scale(W.cols());
    for (Eigen::Index j = 0; j < W.cols(); ++j) {
      const double s = W.col(j).dot(BW.col(j));
      scale[j] = s > 0.0 ? 1.0 / std::sqrt(s) : 0.0;
    }
    Eigen::MatrixXd G = scale.asDiagonal() * (W.transpose() * BW) * scale.asDiagonal();
    G = 0.5 * (G + G.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
    const Eigen::VectorXd& d = es.eigenvalues();
    const double dmax = d.maxCoeff();
    std::vector<int> keep;
    for (Eigen::Index i = 0; i < d.size(); ++i) {
      if (d[i] > 1e-12 * dmax) keep.push_back(static_cast<int>(i));
    }
    Eigen::MatrixXd C(W.cols(), keep.size());
    for (std::size_t k = 0; k < keep.size(); ++k) {
      C.col(k) = es.eigenvectors().col(keep[k]) / std::sqrt(d[keep[k]]);
    }
    W = W * (scale.asDiagonal() * C);
  }
  return W;
}

void require_spd(const ColSparse& M, const char* name) {
  Eigen::SimplicialLDLT<ColSparse> f(M);
  if (f.info() != Eigen::Success || !(f.vectorD().minCoeff() > 0.0)) {
    throw InputError(std::string(name) + " is not symmetric positive definite");
  }
}

EigenPairs iterative_smallest(const SparseMatrix& A, const SparseMatrix& B, int m, const SolveOptions& o) {
  const int n = static_cast<int>(A.rows());
  const ColSparse Ac = A;
  const ColSparse Bc = B;
  require_spd(Bc, "B");
  Eigen::SimplicialLDLT<ColSparse> fa(Ac);
  if (fa.info() != Eigen::Success || !(fa.vectorD().minCoeff() > 0.0)) {
    throw InputError("A is not positive definite; shift-invert at zero needs SPD A");
  }

  const int p = std::min(n, o.block_size > 0 ? std::max(o.block_size, m) : std::max(2 * m, m + 6));
  std::mt19937_64 rng(o.seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd X(n, p);
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    for (Eigen::Index i = 0; i < X.rows(); ++i) X(i, j) = normal(rng);
  }
  X = b_orthonormalize(X, Bc);

  Eigen::VectorXd theta;
  Eigen::VectorXd res = Eigen::VectorXd::Constant(m, std::numeric_limits<double>::infinity());
  int locked = 0;
  for (int it = 1; it <= o.max_iterations; ++it) {
    const Eigen::MatrixXd active = X.rightCols(X.cols() - locked);
    const Eigen::MatrixXd Y1 = fa.solve(Bc * active);
    const Eigen::MatrixXd Y2 = fa.solve(Bc * Y1);
    Eigen::MatrixXd V(n, X.cols() + Y1.cols() + Y2.cols());
    V << X, Y1, Y2;
    V = b_orthonormalize(V, Bc);

    Eigen::MatrixXd H = V.transpose() * (Ac * V);
    H = 0.5 * (H + H.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    const int keep = std::min<int>(p, static_cast<int>(V.cols()));
    if (keep < m) throw InputError("search space collapsed below the requested number of eigenpairs");
    X = V * es.eigenvectors().leftCols(keep);
    theta = es.eigenvalues().head(keep);

    res = relative_residuals(Ac, Bc, theta.head(m), X.leftCols(m));
    locked = 0;
    while (locked < m && res[locked] <= o.tol) ++locked;
    if (locked == m) {
      EigenPairs out;
      out.values = theta.head(m);
      out.vectors = X.leftCols(m);
      out.residuals = res;
      out.method = "iterative";
      out.iterations = it;
      return out;
    }
  }
  std::ostringstream msg;
  msg << "block shift-invert iteration did not reach relative residual " << o.tol << " within "
      << o.max_iterations << " iterations (worst " << res.maxCoeff() << ")";
  throw ConvergenceError(msg.str(), std::vector<double>(res.data(), res.data() + res.size()));
}

}  // namespace

EigenPairs dense_smallest(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, int m) {
  check_shapes(A.rows(), A.cols(), B.rows(), B.cols(), m);
  Eigen::LLT<Eigen::MatrixXd> llt(B);
  if (llt.info() != Eigen::Success) throw InputError("B is not symmetric positive definite");
  const Eigen::MatrixXd As = 0.5 * (A + A.transpose());
  const Eigen::MatrixXd Bs = 0.5 * (B + B.transpose());
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(As, Bs, Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
  if (es.info() != Eigen::Success) throw ConvergenceError("dense generalized eigensolver failed", {});
  EigenPairs out;
  out.values = es.eigenvalues().head(m);
  out.vectors = es.eigenvectors().leftCols(m);
  out.residuals = relative_residuals(As, Bs, out.values, out.vectors);
  out.method = "dense";
  return out;
}

EigenPairs solve_smallest(const SparseMatrix& A, const SparseMatrix& B, int m, const SolveOptions& options) {
  check_shapes(A.rows(), A.cols(), B.rows(), B.cols(), m);
  SolverMethod method = options.method;
  if (method == SolverMethod::Auto) {
    method = A.rows() <= options.dense_limit ? SolverMethod::Dense : SolverMethod::Iterative;
  }
  if (method == SolverMethod::Dense) {
    if (A.rows() > kDenseSpectrumLimit) throw InputError("dense solver limited to 3000 unknowns");
    return dense_smallest(Eigen::MatrixXd(A), Eigen::MatrixXd(B), m);
  }
  return iterative_smallest(A, B, m, options);
}

EigenPairs full_spectrum(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  if (A.rows() > kDenseSpectrumLimit) throw InputError("full spectrum limited to 3000 unknowns");
  return dense_smallest(A, B, static_cast<int>(A.rows()));
}

EigenPairs full_spectrum(const SparseMatrix& A, const SparseMatrix& B) {
  if (A.rows() > kDenseSpectrumLimit) throw InputError("full spectrum limited to 3000 unknowns");
  return full_spectrum(Eigen::MatrixXd(A), Eigen::MatrixXd(B));
}

SolverMethod parse_solver_method(const std::string& name) {
  if (name == "dense") return SolverMethod::Dense;
  if (name == "iterative") return SolverMethod::Iterative;
  if (name == "auto") return SolverMethod::Auto;
  throw InputError("unknown solver method '" + name + "' (expected dense, iterative or auto)");
}

}  // namespace surfeig
