#include "surfeig/cli.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>
#include <omp.h>

#include "surfeig/abstract_framework.hpp"
#include "surfeig/analysis.hpp"
#include "surfeig/eigensolve.hpp"
#include "surfeig/errors.hpp"
#include "surfeig/fem.hpp"
#include "surfeig/mesh.hpp"

namespace surfeig {

std::vector<int> parse_level_range(const std::string& text) {
  auto to_int = [&](const std::string& s) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (s.empty() || used != s.size()) throw InputError("malformed level range '" + text + "'");
    return v;
  };
  const auto dots = text.find("..");
  int lo, hi;
  if (dots == std::string::npos) {
    lo = hi = to_int(text);
  } else {
    lo = to_int(text.substr(0, dots));
    hi = to_int(text.substr(dots + 2));
  }
  if (lo < 0 || hi < lo) throw InputError("level range must be ascending and nonnegative: '" + text + "'");
  if (hi > kMaxIcosphereLevel) throw InputError("level exceeds " + std::to_string(kMaxIcosphereLevel));
  std::vector<int> levels;
  for (int l = lo; l <= hi; ++l) levels.push_back(l);
  return levels;
}

namespace {

struct SurfaceOptions {
  double radius = 1.0;
  LevelSetSurface surface() const {
    if (!(radius > 0.0)) throw InputError("radius must be positive");
    return radius == 1.0 ? LevelSetSurface::unit_sphere() : LevelSetSurface::sphere(radius);
  }
};

struct SolverFlags {
  std::string method = "auto";
  double tol = 1e-10;
  int max_iterations = 400;
  SolveOptions options() const {
    SolveOptions o;
    o.method = parse_solver_method(method);
    if (!(tol > 0.0)) throw InputError("tolerance must be positive");
    o.tol = tol;
    if (max_iterations < 1) throw InputError("iteration limit must be positive");
    o.max_iterations = max_iterations;
    return o;
  }
};

std::vector<Axis> parse_fields(const std::string& s) {
  if (s == "all") return {Axis::Z, Axis::X, Axis::Y};
  if (s == "none") return {};
  return {parse_axis(s)};
}

// Writes to the file if a path is given, otherwise to `fallback`.
template <class F>
void emit(const std::string& path, std::ostream& fallback, F&& write) {
  if (path.empty()) {
    write(fallback);
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot open '" + path + "' for writing");
  write(f);
  if (!f) throw InputError("failed writing '" + path + "'");
}

nlohmann::ordered_json diagnostics_json(const ConvergenceStudy& study) {
  nlohmann::ordered_json levels = nlohmann::ordered_json::array();
  for (const auto& d : study.levels) {
    nlohmann::ordered_json j;
    j["level"] = d.level;
    j["h"] = d.h;
    j["ndof"] = d.ndof;
    j["eta"] = d.eta;
    j["area"] = d.area;
    j["eigenvalues"] = std::vector<double>(d.eigenvalues.data(), d.eigenvalues.data() + d.eigenvalues.size());
    j["residuals"] = std::vector<double>(d.residuals.data(), d.residuals.data() + d.residuals.size());
    j["solver"] = d.solver;
    j["iterations"] = d.iterations;
    j["window"] = {{"lo", d.window.lo},         {"hi", d.window.hi},
                   {"members", d.window.members}, {"gamma", d.window.gamma},
                   {"gamma_exact", d.window.gamma_exact}};
    nlohmann::ordered_json fields = nlohmann::ordered_json::array();
    for (std::size_t f = 0; f < d.fields.size(); ++f) {
      fields.push_back({{"axis", axis_name(d.fields[f])},
                        {"energy_error", d.eigenvector_errors[f].energy},
                        {"l2_error", d.eigenvector_errors[f].l2},
                        {"defect_dual_norm", d.defect_dual_norms[f]},
                        {"interpolation_energy_error", d.interpolation_energy_errors[f]}});
    }
    j["fields"] = fields;
    j["seconds"] = d.seconds;
    levels.push_back(j);
  }
  return levels;
}

struct Options {
  int threads = 0;

  struct {
    int k = 1, kg = 1, num_eigs = 6, quad_degree = 0;
    std::string levels, fields = "all", out, export_mesh, export_matrices, diagnostics;
    double eta = 1.0, window_lo = 0.0, window_hi = 1.5, target = 1.0;
    SurfaceOptions surface;
    SolverFlags solver;
  } converge;

  struct {
    int level = 0, k = 1, kg = 1, num_eigs = 6;
    double eta = 1.0;
    SurfaceOptions surface;
    SolverFlags solver;
  } solve;

  struct {
    int kg = 1, quad_degree = 0;
    std::string levels, out;
    SurfaceOptions surface;
  } area;

  struct {
    int trials = 100;
    std::uint64_t seed = 1;
    std::string mode = "exact", out;
    InstanceSpec spec;
  } abstract;
};

void add_solver_flags(CLI::App* app, SolverFlags& s) {
  app->add_option("--method", s.method, "eigensolver: auto, dense or iterative")->capture_default_str();
  app->add_option("--tol", s.tol, "relative residual tolerance")->capture_default_str();
  app->add_option("--max-iterations", s.max_iterations, "iteration limit of the iterative solver")
      ->capture_default_str();
}

int cmd_converge(const Options& o, std::ostream& out, std::ostream& err) {
  const auto& c = o.converge;
  ConvergenceConfig cfg;
  cfg.surface = c.surface.surface();
  cfg.k = c.k;
  cfg.kg = c.kg;
  cfg.levels = parse_level_range(c.levels);
  cfg.num_eigs = c.num_eigs;
  cfg.eta_coeff = c.eta;
  cfg.fields = parse_fields(c.fields);
  cfg.solver = c.solver.options();
  cfg.quad_degree = c.quad_degree;
  cfg.window_lo = c.window_lo;
  cfg.window_hi = c.window_hi;
  cfg.target = c.target;
  if (!c.export_mesh.empty()) cfg.export_mesh_dir = c.export_mesh;
  if (!c.export_matrices.empty()) cfg.export_matrices_dir = c.export_matrices;

  const ConvergenceStudy study = convergence_study(cfg);
  emit(c.out, out, [&](std::ostream& s) { write_convergence_csv(s, study.records); });
  if (!c.diagnostics.empty())
    emit(c.diagnostics, out, [&](std::ostream& s) { s << diagnostics_json(study).dump(2) << '\n'; });
  for (const auto& d : study.levels) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "level %d: %d unknowns, %s solver, %d iterations, %.2f s\n", d.level, d.ndof,
                  d.solver.c_str(), d.iterations, d.seconds);
    err << buf;
  }
  return kExitOk;
}

int cmd_solve(const Options& o, std::ostream& out) {
  const auto& c = o.solve;
  if (c.k < 1 || c.k > 4 || c.kg < 1 || c.kg > 4) throw InputError("k and k_g must lie in [1, 4]");
  if (c.num_eigs < 1) throw InputError("number of eigenvalues must be positive");
  if (c.level < 0 || c.level > kMaxIcosphereLevel) throw InputError("level out of range");
  const LevelSetSurface surface = c.surface.surface();
  const SolveOptions sopt = c.solver.options();

  const LinearSurfaceMesh mesh = icosphere(c.level, surface);
  const ParametricMap map(mesh, c.kg, surface);
  const FeSpace space = build_space(mesh, map, c.k);
  if (c.num_eigs > space.num_dofs()) throw InputError("more eigenvalues requested than unknowns");
  AssemblyOptions aopt;
  aopt.eta_coeff = c.eta;
  const AssembledForms forms = assemble(space, map, surface, aopt);
  const EigenPairs pairs = solve_smallest(forms.A, forms.B, c.num_eigs, sopt);

  const int nref = surface.radius() == 1.0 ? std::min(c.num_eigs, 6) : std::min(c.num_eigs, 3);
  const std::vector<double> exact = exact_sphere_eigenvalues(nref);
  char buf[200];
  std::snprintf(buf, sizeof buf, "# level %d  k %d  kg %d  h %.6e  unknowns %d  solver %s  iterations %d\n", c.level,
                c.k, c.kg, space.h, space.num_dofs(), pairs.method.c_str(), pairs.iterations);
  out << buf;
  out << "j,lambda_h,lambda_exact,abs_error,residual\n";
  for (int j = 0; j < pairs.size(); ++j) {
    if (j < nref) {
      const double ex = exact[static_cast<std::size_t>(j)];
      std::snprintf(buf, sizeof buf, "%d,%.16e,%.16e,%.6e,%.6e\n", j + 1, pairs.values(j), ex,
                    std::abs(pairs.values(j) - ex), pairs.residuals(j));
    } else {
      std::snprintf(buf, sizeof buf, "%d,%.16e,,,%.6e\n", j + 1, pairs.values(j), pairs.residuals(j));
    }
    out << buf;
  }
  return kExitOk;
}

int cmd_area(const Options& o, std::ostream& out) {
  const auto& c = o.area;
  const auto records = area_study(c.surface.surface(), c.kg, parse_level_range(c.levels), c.quad_degree);
  emit(c.out, out, [&](std::ostream& s) { write_area_csv(s, records); });
  return kExitOk;
}

int cmd_abstract(const Options& o, std::ostream& out, std::ostream& err) {
  const auto& c = o.abstract;
  if (c.trials < 1) throw InputError("trials must be positive");
  const auto reports = run_trials(c.trials, c.seed, parse_consistency_mode(c.mode), c.spec);
  int met = 0, violations = 0;
  for (const auto& r : reports)
    for (const auto& b : r.checks) {
      met += b.checks;
      violations += b.pass ? 0 : 1;
    }
  emit(c.out, out, [&](std::ostream& s) {
    for (const auto& r : reports) write_jsonl(s, r);
  });
  err << "abstract: " << reports.size() << " instances, " << met << " comparisons with hypotheses met, "
      << violations << " violated bounds\n";
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Surface vector-Laplace eigenvalue solver and error-bound checks", "surfeig_cli"};
  app.require_subcommand(1);
  app.add_option("--threads", o.threads, "OpenMP thread count (default: OMP_NUM_THREADS)");

  auto* conv = app.add_subcommand("converge", "eigenvalue/eigenvector convergence study on an icosphere hierarchy");
  conv->add_option("--k", o.converge.k, "velocity degree")->capture_default_str();
  conv->add_option("--kg", o.converge.kg, "geometry degree")->capture_default_str();
  conv->add_option("--levels", o.converge.levels, "refinement levels A..B")->required();
  conv->add_option("--num-eigs", o.converge.num_eigs, "number of eigenpairs")->capture_default_str();
  conv->add_option("--fields", o.converge.fields, "Killing fields for eigenvector errors: z, x, y, all or none")
      ->capture_default_str();
  conv->add_option("--eta", o.converge.eta, "penalty coefficient, eta = C / h^2")->capture_default_str();
  conv->add_option("--window-lo", o.converge.window_lo, "lower end of the eigenvalue window")->capture_default_str();
  conv->add_option("--window-hi", o.converge.window_hi, "upper end of the eigenvalue window")->capture_default_str();
  conv->add_option("--target", o.converge.target, "eigenvalue of the compared eigenvectors")->capture_default_str();
  conv->add_option("--radius", o.converge.surface.radius, "sphere radius")->capture_default_str();
  conv->add_option("--quad-degree", o.converge.quad_degree, "quadrature degree (0: automatic)");
  conv->add_option("--out", o.converge.out, "CSV output file (default: stdout)");
  conv->add_option("--diagnostics", o.converge.diagnostics, "per-level JSON diagnostics file");
  conv->add_option("--export-mesh", o.converge.export_mesh, "directory for OFF meshes");
  conv->add_option("--export-matrices", o.converge.export_matrices, "directory for MatrixMarket matrices");
  add_solver_flags(conv, o.converge.solver);

  auto* solve = app.add_subcommand("solve", "solve one level and print the eigenvalue table");
  solve->add_option("--level", o.solve.level, "refinement level")->required();
  solve->add_option("--k", o.solve.k, "velocity degree")->capture_default_str();
  solve->add_option("--kg", o.solve.kg, "geometry degree")->capture_default_str();
  solve->add_option("--num-eigs", o.solve.num_eigs, "number of eigenpairs")->capture_default_str();
  solve->add_option("--eta", o.solve.eta, "penalty coefficient")->capture_default_str();
  solve->add_option("--radius", o.solve.surface.radius, "sphere radius")->capture_default_str();
  add_solver_flags(solve, o.solve.solver);

  auto* area = app.add_subcommand("area", "area error of the parametric surface approximation");
  area->add_option("--kg", o.area.kg, "geometry degree")->capture_default_str();
  area->add_option("--levels", o.area.levels, "refinement levels A..B")->required();
  area->add_option("--radius", o.area.surface.radius, "sphere radius")->capture_default_str();
  area->add_option("--quad-degree", o.area.quad_degree, "quadrature degree (0: automatic)");
  area->add_option("--out", o.area.out, "CSV output file (default: stdout)");

  auto* abs = app.add_subcommand("abstract", "check the abstract error bounds on random finite-dimensional instances");
  abs->add_option("--trials", o.abstract.trials, "number of instances")->capture_default_str();
  abs->add_option("--seed", o.abstract.seed, "seed of the first instance")->capture_default_str();
  abs->add_option("--mode", o.abstract.mode, "exact or perturbed")->capture_default_str();
  abs->add_option("--out", o.abstract.out, "JSONL output file (default: stdout)");
  abs->add_option("--dim", o.abstract.spec.N, "dimension of H")->capture_default_str();
  abs->add_option("--dim-ext", o.abstract.spec.N_ex, "dimension of the extension space")->capture_default_str();
  abs->add_option("--dim-discrete", o.abstract.spec.n_h, "dimension of V_h")->capture_default_str();
  abs->add_option("--k-max", o.abstract.spec.k_max, "number of tracked eigenpairs")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (o.threads < 0) throw InputError("thread count must be nonnegative");
    if (o.threads > 0) omp_set_num_threads(o.threads);
    if (conv->parsed()) return cmd_converge(o, out, err);
    if (solve->parsed()) return cmd_solve(o, out);
    if (area->parsed()) return cmd_area(o, out);
    return cmd_abstract(o, out, err);
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const UnsupportedError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << '\n';
    return kExitNumerical;
  }
}

int run(int argc, const char* const* argv) { return run(argc, argv, std::cout, std::cerr); }

}  // namespace surfeig
