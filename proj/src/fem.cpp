#include "surfeig/fem.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <string>
#include <vector>

#include <Eigen/SparseCholesky>

#include "surfeig/errors.hpp"
#include "surfeig/quadrature.hpp"

namespace surfeig {

namespace {

constexpr int kChunk = 256;

/// Collects the first exception thrown inside a parallel region.
class ErrorSlot {
public:
  template <class F>
  void run(F&& f) {
    try {
      f();
    } catch (...) {
      std::lock_guard<std::mutex> lock(mutex_);
      if (!error_) error_ = std::current_exception();
    }
  }
  void rethrow() const {
    if (error_) std::rethrow_exception(error_);
  }

private:
  std::mutex mutex_;
  std::exception_ptr error_;
};

/// Basis and geometry tables at the points of one quadrature rule.
struct ReferenceTables {
  QuadratureRule rule;
  std::vector<Eigen::VectorXd> geo_values;
  std::vector<Eigen::MatrixX2d> geo_grads;
  std::vector<Eigen::VectorXd> fe_values;
  std::vector<Eigen::MatrixX2d> fe_grads;

  ReferenceTables(const FeSpace& space, const ParametricMap& map, int degree) : rule(triangle_rule(degree)) {
    const int nq = rule.size();
    geo_values.resize(nq);
    geo_grads.resize(nq);
    fe_values.resize(nq);
    fe_grads.resize(nq);
    for (int q = 0; q < nq; ++q) {
      map.basis().eval(rule.points[q], geo_values[q], geo_grads[q]);
      space.basis.eval(rule.points[q], fe_values[q], fe_grads[q]);
    }
  }
};

/// Per-point quantities of the vector basis phi_i e_c, local index c * nloc + i.
struct PointBasis {
  double weight = 0.0;     ///< quadrature weight times area factor
  Vec3 x, n_h, n_exact;
  Mat3 P, H;
  Eigen::Matrix<double, 9, Eigen::Dynamic> E;  ///< vec(E_T,h(phi)) column-major
  Eigen::Matrix<double, 3, Eigen::Dynamic> T;  ///< P_h phi
  Eigen::RowVectorXd normal;                    ///< phi . n_h
  Eigen::RowVectorXd penalty_normal;            ///< phi . n~_h

  void evaluate(const ReferenceTables& tab, int q, const Eigen::Matrix3Xd& coeffs, const LevelSetSurface& surface) {
    const GeomFrame g = geom_frame(coeffs, tab.geo_values[q], tab.geo_grads[q]);
    weight = tab.rule.weights[q] * g.mu;
    x = g.x;
    n_h = g.n;
    const SurfaceFrame sf = surface_frame(surface, surface_frame(surface, x).p);
    n_exact = sf.n;
    H = sf.H;
    P = Mat3::Identity() - n_h * n_h.transpose();

    const Eigen::Matrix2d metric = g.J.transpose() * g.J;
    const Eigen::Matrix<double, 3, 2> JG = g.J * metric.inverse();
    const Eigen::VectorXd& phi = tab.fe_values[q];
    const int nloc = static_cast<int>(phi.size());
    const Eigen::Matrix3Xd grad = JG * tab.fe_grads[q].transpose();

    E.resize(9, 3 * nloc);
    T.resize(3, 3 * nloc);
    normal.resize(3 * nloc);
    penalty_normal.resize(3 * nloc);
    for (int c = 0; c < 3; ++c) {
      const Vec3 pc = P.col(c);
      for (int i = 0; i < nloc; ++i) {
        const int col = c * nloc + i;
        const Vec3 gi = grad.col(i);
        Mat3 e = 0.5 * (pc * gi.transpose() + gi * pc.transpose()) - (phi[i] * n_h[c]) * H;
        E.col(col) = Eigen::Map<const Eigen::Matrix<double, 9, 1>>(e.data());
        T.col(col) = phi[i] * pc;
        normal[col] = phi[i] * n_h[c];
        penalty_normal[col] = phi[i] * n_exact[c];
      }
    }
  }
};

struct LocalForms {
  Eigen::MatrixXd a_tilde, k_a, b_tilde, k_b;
};

void local_forms(const ReferenceTables& tab, const Eigen::Matrix3Xd& coeffs, const LevelSetSurface& surface,
                 double eta, PointBasis& pb, LocalForms& out) {
  const int nl = 3 * static_cast<int>(tab.fe_values[0].size());
  const int nq = tab.rule.size();
  // stacked sqrt-weighted rows so each form is one Gram product
  Eigen::MatrixXd S(12 * nq, nl), N(nq, nl), K(nq, nl), M(3 * nq, nl);
  for (int q = 0; q < nq; ++q) {
    pb.evaluate(tab, q, coeffs, surface);
    const double s = std::sqrt(pb.weight);
    S.middleRows(12 * q, 9) = s * pb.E;
    S.middleRows(12 * q + 9, 3) = s * pb.T;
    M.middleRows(3 * q, 3) = s * pb.T;
    N.row(q) = s * pb.normal;
    K.row(q) = s * pb.penalty_normal;
  }
  out.a_tilde.noalias() = S.transpose() * S;
  out.b_tilde.noalias() = M.transpose() * M;
  out.k_b.noalias() = N.transpose() * N;
  out.k_a.noalias() = eta * (K.transpose() * K);
}

/// Row-compressed pattern of the blocked vector space.
struct VectorPattern {
  std::vector<std::vector<int>> adjacency;  ///< sorted scalar neighbors, self included
  std::vector<int> row_ptr;
  std::vector<int> cols;
  int nscalar = 0;

  explicit VectorPattern(const FeSpace& space) {
    nscalar = space.num_scalar_dofs();
    const int nloc = space.dofs.nodes_per_cell;
    adjacency.assign(nscalar, {});
    for (int e = 0; e < space.num_elements(); ++e) {
      for (int i = 0; i < nloc; ++i) {
        auto& row = adjacency[space.dofs.node(e, i)];
        for (int j = 0; j < nloc; ++j) row.push_back(space.dofs.node(e, j));
      }
    }
    for (auto& row : adjacency) {
      std::sort(row.begin(), row.end());
      row.erase(std::unique(row.begin(), row.end()), row.end());
    }
    row_ptr.assign(3 * nscalar + 1, 0);
    for (int c = 0; c < 3; ++c) {
      for (int s = 0; s < nscalar; ++s) {
        row_ptr[c * nscalar + s + 1] = 3 * static_cast<int>(adjacency[s].size());
      }
    }
    for (std::size_t r = 0; r + 1 < row_ptr.size(); ++r) row_ptr[r + 1] += row_ptr[r];
    cols.resize(row_ptr.back());
    for (int c = 0; c < 3; ++c) {
      for (int s = 0; s < nscalar; ++s) {
        int pos = row_ptr[c * nscalar + s];
        for (int d = 0; d < 3; ++d) {
          for (int t : adjacency[s]) cols[pos++] = d * nscalar + t;
        }
      }
    }
  }

  int offset(int s, int t) const {
    const auto& row = adjacency[s];
    return static_cast<int>(std::lower_bound(row.begin(), row.end(), t) - row.begin());
  }

  SparseMatrix make(const std::vector<double>& values) const {
    const int n = 3 * nscalar;
    SparseMatrix m(n, n);
    m.resizeNonZeros(static_cast<Eigen::Index>(values.size()));
    std::copy(row_ptr.begin(), row_ptr.end(), m.outerIndexPtr());
    std::copy(cols.begin(), cols.end(), m.innerIndexPtr());
    std::copy(values.begin(), values.end(), m.valuePtr());
    return m;
  }
};

void check_compatible(const FeSpace& space, const ParametricMap& map) {
  if (space.num_elements() != map.num_elements() || space.geometry_degree != map.degree()) {
    throw InputError("finite element space and parametric map describe different meshes");
  }
}

}  // namespace

FeSpace build_space(const LinearSurfaceMesh& mesh, const ParametricMap& map, int k) {
  if (k < 1 || k > 4) throw InputError("finite element degree k must lie in [1, 4]");
  if (mesh.num_triangles() != map.num_elements()) throw InputError("parametric map does not belong to this mesh");
  FeSpace space{LagrangeBasis(k), {}, map.degree(), mesh_size(mesh)};
  space.dofs = build_dof_map(mesh, space.basis);
  return space;
}

int default_quad_degree(const FeSpace& space) { return 2 * (space.degree() + space.geometry_degree); }

AssembledForms assemble(const FeSpace& space, const ParametricMap& map, const LevelSetSurface& surface,
                        const AssemblyOptions& options) {
  check_compatible(space, map);
  if (!(options.eta_coeff >= 0.0)) throw InputError("penalty coefficient must be nonnegative");
  AssembledForms forms;
  forms.quad_degree = options.quad_degree > 0 ? options.quad_degree : default_quad_degree(space);
  forms.eta = options.eta_coeff / (space.h * space.h);

  const ReferenceTables tab(space, map, forms.quad_degree);
  const VectorPattern pattern(space);
  const int nloc = space.dofs.nodes_per_cell;
  const int ns = space.num_scalar_dofs();
  const std::size_t nnz = pattern.cols.size();
  std::vector<double> at(nnz, 0.0), ka(nnz, 0.0), bt(nnz, 0.0), kb(nnz, 0.0);

  const int ne = space.num_elements();
  std::vector<LocalForms> chunk(kChunk);
  ErrorSlot errors;
  for (int first = 0; first < ne; first += kChunk) {
    const int count = std::min(kChunk, ne - first);
#pragma omp parallel
    {
      PointBasis pb;
#pragma omp for schedule(static)
      for (int i = 0; i < count; ++i) {
        errors.run([&] {
          local_forms(tab, map.element_coefficients(first + i), surface, forms.eta, pb, chunk[i]);
        });
      }
    }
    errors.rethrow();
    // merge in element order so the sums do not depend on the thread count
    std::vector<int> off(static_cast<std::size_t>(nloc) * nloc);
    for (int i = 0; i < count; ++i) {
      const int e = first + i;
      for (int a = 0; a < nloc; ++a) {
        for (int b = 0; b < nloc; ++b) off[a * nloc + b] = pattern.offset(space.dofs.node(e, a), space.dofs.node(e, b));
      }
      const LocalForms& lf = chunk[i];
      for (int c = 0; c < 3; ++c) {
        for (int a = 0; a < nloc; ++a) {
          const int s = space.dofs.node(e, a);
          const int row_start = pattern.row_ptr[c * ns + s];
          const int len = static_cast<int>(pattern.adjacency[s].size());
          for (int d = 0; d < 3; ++d) {
            for (int b = 0; b < nloc; ++b) {
              const std::size_t pos = row_start + d * len + off[a * nloc + b];
              const int li = c * nloc + a;
              const int lj = d * nloc + b;
              at[pos] += lf.a_tilde(li, lj);
              ka[pos] += lf.k_a(li, lj);
              bt[pos] += lf.b_tilde(li, lj);
              kb[pos] += lf.k_b(li, lj);
            }
          }
        }
      }
    }
  }

  forms.a_tilde = pattern.make(at);
  forms.k_a = pattern.make(ka);
  forms.b_tilde = pattern.make(bt);
  forms.k_b = pattern.make(kb);
  for (std::size_t i = 0; i < nnz; ++i) {
    at[i] += ka[i];
    bt[i] += kb[i];
  }
  forms.A = pattern.make(at);
  forms.B = pattern.make(bt);

  if (options.check_spd) {
    const Eigen::SparseMatrix<double> Bc = forms.B;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(Bc);
    if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().minCoeff() > 0.0)) {
      throw AssemblyError("assembled mass matrix B_h is not positive definite");
    }
  }
  return forms;
}

Eigen::VectorXd interpolate(const VectorField& field, const FeSpace& space, const ParametricMap& map,
                            const LevelSetSurface& surface) {
  check_compatible(space, map);
  const int nloc = space.dofs.nodes_per_cell;
  std::vector<Eigen::VectorXd> values(nloc);
  std::vector<Eigen::MatrixX2d> grads(nloc);
  for (int m = 0; m < nloc; ++m) map.basis().eval(space.basis.node_point(m), values[m], grads[m]);
  const int ns = space.num_scalar_dofs();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(space.num_dofs());
  std::vector<char> done(ns, 0);
  for (int e = 0; e < space.num_elements(); ++e) {
    for (int m = 0; m < nloc; ++m) {
      const int s = space.dofs.node(e, m);
      if (done[s]) continue;
      done[s] = 1;
      const Vec3 x = map.element_coefficients(e) * values[m];
      const Vec3 u = field(closest_point(surface, x));
      for (int c = 0; c < 3; ++c) out[space.dof(c, s)] = u[c];
    }
  }
  return out;
}

Eigen::VectorXd interpolate(const KillingField& field, const FeSpace& space, const ParametricMap& map,
                            const LevelSetSurface& surface) {
  return interpolate([&](const Vec3& p) { return killing_eval(surface, field, p).value; }, space, map, surface);
}

ExtendedPairings extended_pairings(const KillingField& field, double lambda, const FeSpace& space,
                                   const ParametricMap& map, const LevelSetSurface& surface,
                                   const AssembledForms& forms) {
  check_compatible(space, map);
  const ReferenceTables tab(space, map, forms.quad_degree);
  const int nloc = space.dofs.nodes_per_cell;
  const int nl = 3 * nloc;
  const int ne = space.num_elements();
  const int nq = tab.rule.size();

  ExtendedPairings out;
  out.a_vec = Eigen::VectorXd::Zero(space.num_dofs());
  out.b_vec = Eigen::VectorXd::Zero(space.num_dofs());

  struct Local {
    Eigen::VectorXd a, b;
    double aa = 0.0, bb = 0.0;
  };
  std::vector<Local> chunk(kChunk);
  ErrorSlot errors;
  for (int first = 0; first < ne; first += kChunk) {
    const int count = std::min(kChunk, ne - first);
#pragma omp parallel
    {
      PointBasis pb;
#pragma omp for schedule(static)
      for (int i = 0; i < count; ++i) {
        errors.run([&] {
          Local& loc = chunk[i];
          loc.a = Eigen::VectorXd::Zero(nl);
          loc.b = Eigen::VectorXd::Zero(nl);
          loc.aa = loc.bb = 0.0;
          const auto& coeffs = map.element_coefficients(first + i);
          for (int q = 0; q < nq; ++q) {
            pb.evaluate(tab, q, coeffs, surface);
            const KillingValue kv = killing_eval(surface, field, pb.x);
            const Vec3& u = kv.value;
            const Mat3 grad = pb.P * kv.jacobian * pb.P;
            const Mat3 et = 0.5 * (grad + grad.transpose()) - u.dot(pb.n_h) * pb.H;
            const Eigen::Map<const Eigen::Matrix<double, 9, 1>> ev(et.data());
            const Vec3 pu = pb.P * u;
            const double un = u.dot(pb.n_h);
            const double ut = u.dot(pb.n_exact);
            const double w = pb.weight;
            loc.aa += w * (et.squaredNorm() + pu.squaredNorm() + forms.eta * ut * ut);
            loc.bb += w * (pu.squaredNorm() + un * un);
            loc.a.noalias() += w * (pb.E.transpose() * ev + pb.T.transpose() * pu);
            loc.a += (w * forms.eta * ut) * pb.penalty_normal.transpose();
            loc.b.noalias() += w * (pb.T.transpose() * pu);
            loc.b += (w * un) * pb.normal.transpose();
          }
        });
      }
    }
    errors.rethrow();
    for (int i = 0; i < count; ++i) {
      const int e = first + i;
      out.a_ee += chunk[i].aa;
      out.b_ee += chunk[i].bb;
      for (int c = 0; c < 3; ++c) {
        for (int m = 0; m < nloc; ++m) {
          const int g = space.dof(c, space.dofs.node(e, m));
          out.a_vec[g] += chunk[i].a[c * nloc + m];
          out.b_vec[g] += chunk[i].b[c * nloc + m];
        }
      }
    }
  }
  out.r = out.a_vec - lambda * out.b_vec;
  return out;
}

}  // namespace surfeig
