#include "surfeig/analysis.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include <Eigen/SparseCholesky>

#include "surfeig/errors.hpp"
#include "surfeig/mesh.hpp"

namespace surfeig {

std::vector<double> exact_sphere_eigenvalues(int m) {
  if (m < 1) throw InputError("number of reference eigenvalues must be positive");
  if (m > 6) throw UnsupportedError("no reference value beyond the sixth eigenvalue");
  const std::vector<double> all = {1.0, 1.0, 1.0, 2.0, 2.0, 2.0};
  return {all.begin(), all.begin() + m};
}

ClusterWindow make_window(const EigenPairs& pairs, double lo, double hi, double target) {
  if (!(lo <= hi)) throw InputError("window bounds must satisfy lo <= hi");
  ClusterWindow w;
  w.lo = lo;
  w.hi = hi;
  w.target = target;
  for (int i = 0; i < pairs.size(); ++i) {
    const double l = pairs.values[i];
    if (l >= lo && l <= hi) {
      w.members.push_back(i);
    } else {
      w.gamma = std::max(w.gamma, l / std::abs(l - target));
      if (l > hi) w.gamma_exact = true;
    }
  }
  return w;
}

EigenvectorError eigenvector_error(const ClusterWindow& window, const EigenPairs& pairs, const AssembledForms& forms,
                                   const ExtendedPairings& pairings) {
  if (window.members.empty()) throw InputError("eigenvalue window contains no computed eigenvalue");
  const int nm = static_cast<int>(window.members.size());
  Eigen::MatrixXd X(pairs.vectors.rows(), nm);
  for (int i = 0; i < nm; ++i) X.col(i) = pairs.vectors.col(window.members[i]);
  const Eigen::VectorXd c = X.transpose() * pairings.b_vec;
  const Eigen::MatrixXd AX = forms.A * X;
  const Eigen::MatrixXd BX = forms.B * X;
  const Eigen::MatrixXd XAX = X.transpose() * AX;
  const Eigen::MatrixXd XBX = X.transpose() * BX;

  EigenvectorError err;
  err.energy_squared_raw = pairings.a_ee - 2.0 * c.dot(X.transpose() * pairings.a_vec) + c.dot(XAX * c);
  err.l2_squared_raw = pairings.b_ee - 2.0 * c.dot(c) + c.dot(XBX * c);
  err.energy = std::sqrt(std::max(0.0, err.energy_squared_raw));
  err.l2 = std::sqrt(std::max(0.0, err.l2_squared_raw));
  return err;
}

double defect_dual_norm(const Eigen::VectorXd& r, const SparseMatrix& A) {
  if (r.size() != A.rows()) throw InputError("defect vector and matrix sizes differ");
  if (r.squaredNorm() == 0.0) return 0.0;
  const Eigen::SparseMatrix<double> Ac = A;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> f(Ac);
  if (f.info() != Eigen::Success || !(f.vectorD().minCoeff() > 0.0)) {
    throw InputError("dual norm needs a symmetric positive definite matrix");
  }
  const Eigen::VectorXd y = f.solve(r);
  return std::sqrt(std::max(0.0, r.dot(y)));
}

std::optional<double> eoc(double e0, double e1, double h0, double h1) {
  if (!(e0 > 0.0) || !(e1 > 0.0) || !(h0 > 0.0) || !(h1 > 0.0) || h0 == h1) return std::nullopt;
  return std::log(e0 / e1) / std::log(h0 / h1);
}

std::optional<Axis> killing_axis_for_row(int j) {
  switch (j) {
    case 1: return Axis::Z;
    case 2: return Axis::X;
    case 3: return Axis::Y;
    default: return std::nullopt;
  }
}

int default_area_quad_degree(int kg) { return 2 * kg + 6; }

namespace {

void validate(const ConvergenceConfig& c) {
  if (c.k < 1 || c.k > 4) throw InputError("k must lie in [1, 4]");
  if (c.kg < 1 || c.kg > 4) throw InputError("k_g must lie in [1, 4]");
  if (c.levels.empty()) throw InputError("at least one level is required");
  for (std::size_t i = 0; i < c.levels.size(); ++i) {
    if (c.levels[i] < 0 || c.levels[i] > kMaxIcosphereLevel) throw InputError("level out of range");
    if (i > 0 && c.levels[i] <= c.levels[i - 1]) throw InputError("levels must be strictly ascending");
  }
  if (c.num_eigs < 1) throw InputError("number of eigenvalues must be positive");
  if (!(c.eta_coeff >= 0.0)) throw InputError("penalty coefficient must be nonnegative");
}

double exact_area(const LevelSetSurface& s) { return s.area(); }

}  // namespace

ConvergenceStudy convergence_study(const ConvergenceConfig& config) {
  validate(config);
  const bool unit = config.surface.kind() == LevelSetSurface::Kind::UnitSphere ||
                    config.surface.radius() == 1.0;
  ConvergenceStudy study;
  for (int level : config.levels) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const LinearSurfaceMesh mesh = icosphere(level, config.surface);
      const ParametricMap map(mesh, config.kg, config.surface);
      const FeSpace space = build_space(mesh, map, config.k);
      const int n = space.num_dofs();
      const bool dense = config.solver.method == SolverMethod::Dense ||
                         (config.solver.method == SolverMethod::Auto && n <= config.solver.dense_limit);
      if (n > (dense ? kMaxDenseDofs : kMaxIterativeDofs)) {
        std::ostringstream msg;
        msg << n << " unknowns exceed the " << (dense ? "dense" : "iterative") << " solver limit";
        throw InputError(msg.str());
      }
      if (config.num_eigs > n) throw InputError("more eigenvalues requested than unknowns");

      AssemblyOptions aopt;
      aopt.eta_coeff = config.eta_coeff;
      aopt.quad_degree = config.quad_degree;
      const AssembledForms forms = assemble(space, map, config.surface, aopt);

      if (config.export_mesh_dir) {
        std::filesystem::create_directories(*config.export_mesh_dir);
        write_off(mesh, *config.export_mesh_dir / ("level_" + std::to_string(level) + ".off"));
      }
      if (config.export_matrices_dir) {
        const auto& dir = *config.export_matrices_dir;
        std::filesystem::create_directories(dir);
        const std::string tag = "_level_" + std::to_string(level) + ".mtx";
        write_matrix_market(forms.A, dir / ("A" + tag));
        write_matrix_market(forms.B, dir / ("B" + tag));
        write_matrix_market(forms.a_tilde, dir / ("a_tilde" + tag));
        write_matrix_market(forms.k_a, dir / ("k_a" + tag));
        write_matrix_market(forms.b_tilde, dir / ("b_tilde" + tag));
        write_matrix_market(forms.k_b, dir / ("k_b" + tag));
      }

      const EigenPairs pairs = solve_smallest(forms.A, forms.B, config.num_eigs, config.solver);

      LevelDiagnostics diag;
      diag.level = level;
      diag.h = space.h;
      diag.ndof = n;
      diag.eta = forms.eta;
      diag.eigenvalues = pairs.values;
      diag.residuals = pairs.residuals;
      diag.solver = pairs.method;
      diag.iterations = pairs.iterations;
      diag.window = make_window(pairs, config.window_lo, config.window_hi, config.target);
      const int aq = config.area_quad_degree > 0 ? config.area_quad_degree : default_area_quad_degree(config.kg);
      diag.area = surface_area(map, aq);

      for (Axis axis : config.fields) {
        const KillingField field{axis};
        const ExtendedPairings pr = extended_pairings(field, config.target, space, map, config.surface, forms);
        diag.fields.push_back(axis);
        diag.eigenvector_errors.push_back(eigenvector_error(diag.window, pairs, forms, pr));
        diag.defect_dual_norms.push_back(defect_dual_norm(pr.r, forms.A));
        const Eigen::VectorXd x = interpolate(field, space, map, config.surface);
        const double ie = pr.a_ee - 2.0 * pr.a_vec.dot(x) + x.dot(forms.A * x);
        diag.interpolation_energy_errors.push_back(std::sqrt(std::max(0.0, ie)));
      }
      diag.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      study.levels.push_back(std::move(diag));
    } catch (const ConvergenceError& e) {
      throw ConvergenceError("level " + std::to_string(level) + ": " + e.what(), e.residuals());
    } catch (const InputError& e) {
      throw InputError("level " + std::to_string(level) + ": " + e.what());
    } catch (const GeometryError& e) {
      throw GeometryError("level " + std::to_string(level) + ": " + e.what());
    } catch (const AssemblyError& e) {
      throw AssemblyError("level " + std::to_string(level) + ": " + e.what());
    }
  }

  const int nref = unit ? std::min(config.num_eigs, 6) : std::min(config.num_eigs, 3);
  const std::vector<double> exact = exact_sphere_eigenvalues(std::max(nref, 1));
  const double area_exact = exact_area(config.surface);
  for (std::size_t li = 0; li < study.levels.size(); ++li) {
    const LevelDiagnostics& d = study.levels[li];
    const LevelDiagnostics* prev = li > 0 ? &study.levels[li - 1] : nullptr;
    for (int j = 1; j <= config.num_eigs; ++j) {
      ConvergenceRecord r;
      r.level = d.level;
      r.h = d.h;
      r.ndof = d.ndof;
      r.j = j;
      r.lambda_h = d.eigenvalues[j - 1];
      if (j <= nref) {
        r.lambda_exact = exact[j - 1];
        r.ev_err = std::abs(r.lambda_h - exact[j - 1]);
        if (prev) r.ev_eoc = eoc(std::abs(prev->eigenvalues[j - 1] - exact[j - 1]), *r.ev_err, prev->h, d.h);
      }
      if (const auto axis = killing_axis_for_row(j)) {
        for (std::size_t f = 0; f < d.fields.size(); ++f) {
          if (d.fields[f] != *axis) continue;
          r.evec_energy_err = d.eigenvector_errors[f].energy;
          r.evec_l2_err = d.eigenvector_errors[f].l2;
          if (prev && f < prev->eigenvector_errors.size()) {
            r.evec_energy_eoc = eoc(prev->eigenvector_errors[f].energy, d.eigenvector_errors[f].energy, prev->h, d.h);
            r.evec_l2_eoc = eoc(prev->eigenvector_errors[f].l2, d.eigenvector_errors[f].l2, prev->h, d.h);
          }
        }
      }
      r.area_err = std::abs(area_exact - d.area);
      if (prev) r.area_eoc = eoc(std::abs(area_exact - prev->area), *r.area_err, prev->h, d.h);
      study.records.push_back(r);
    }
  }
  return study;
}

std::vector<AreaRecord> area_study(const LevelSetSurface& surface, int kg, const std::vector<int>& levels,
                                   int quad_degree) {
  if (kg < 1 || kg > 4) throw InputError("k_g must lie in [1, 4]");
  if (levels.empty()) throw InputError("at least one level is required");
  const int q = quad_degree > 0 ? quad_degree : default_area_quad_degree(kg);
  std::vector<AreaRecord> out;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i] < 0 || levels[i] > kMaxIcosphereLevel) throw InputError("level out of range");
    if (i > 0 && levels[i] <= levels[i - 1]) throw InputError("levels must be strictly ascending");
    const LinearSurfaceMesh mesh = icosphere(levels[i], surface);
    const ParametricMap map(mesh, kg, surface);
    AreaRecord r;
    r.level = levels[i];
    r.h = mesh_size(mesh);
    r.area = surface_area(map, q);
    r.area_err = std::abs(surface.area() - r.area);
    if (!out.empty()) r.area_eoc = eoc(out.back().area_err, r.area_err, out.back().h, r.h);
    out.push_back(r);
  }
  return out;
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

double to_double(const std::string& s) {
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw InputError("malformed number '" + s + "' in CSV");
  return v;
}

std::optional<double> to_optional(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return to_double(s);
}

}  // namespace

void write_convergence_csv(std::ostream& out, const std::vector<ConvergenceRecord>& records) {
  out << kConvergenceCsvHeader << '\n';
  for (const auto& r : records) {
    out << r.level << ',' << fmt(r.h) << ',' << r.ndof << ',' << r.j << ',' << fmt(r.lambda_h) << ','
        << fmt(r.lambda_exact) << ',' << fmt(r.ev_err) << ',' << fmt(r.ev_eoc) << ',' << fmt(r.evec_energy_err)
        << ',' << fmt(r.evec_energy_eoc) << ',' << fmt(r.evec_l2_err) << ',' << fmt(r.evec_l2_eoc) << ','
        << fmt(r.area_err) << ',' << fmt(r.area_eoc) << '\n';
  }
}

std::vector<ConvergenceRecord> read_convergence_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || split(line).size() != 14 || line.rfind(kConvergenceCsvHeader, 0) != 0) {
    throw InputError("CSV header does not match the convergence schema");
  }
  std::vector<ConvergenceRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 14) throw InputError("CSV row with " + std::to_string(f.size()) + " fields");
    ConvergenceRecord r;
    r.level = std::stoi(f[0]);
    r.h = to_double(f[1]);
    r.ndof = std::stoi(f[2]);
    r.j = std::stoi(f[3]);
    r.lambda_h = to_double(f[4]);
    r.lambda_exact = to_optional(f[5]);
    r.ev_err = to_optional(f[6]);
    r.ev_eoc = to_optional(f[7]);
    r.evec_energy_err = to_optional(f[8]);
    r.evec_energy_eoc = to_optional(f[9]);
    r.evec_l2_err = to_optional(f[10]);
    r.evec_l2_eoc = to_optional(f[11]);
    r.area_err = to_optional(f[12]);
    r.area_eoc = to_optional(f[13]);
    out.push_back(r);
  }
  return out;
}

void write_area_csv(std::ostream& out, const std::vector<AreaRecord>& records) {
  out << "level,h,area_h,area_err,area_eoc\n";
  for (const auto& r : records) {
    out << r.level << ',' << fmt(r.h) << ',' << fmt(r.area) << ',' << fmt(r.area_err) << ',' << fmt(r.area_eoc)
        << '\n';
  }
}

}  // namespace surfeig
