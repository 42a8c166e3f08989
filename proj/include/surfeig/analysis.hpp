#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "surfeig/eigensolve.hpp"
#include "surfeig/fem.hpp"
#include "surfeig/geometry.hpp"

namespace surfeig {

/// Smallest eigenvalues (1,1,1,2,2,2) of the shifted vector Laplacian on the
/// unit sphere, truncated to m. Throws UnsupportedError for m > 6.
std::vector<double> exact_sphere_eigenvalues(int m);

/// Discrete eigenvalues inside [lo, hi] and the gap parameter
/// gamma = max over computed eigenvalues outside the window of l / |l - target|.
struct ClusterWindow {
  double lo = 0.0;
  double hi = 0.0;
  double target = 0.0;
  std::vector<int> members;
  double gamma = 0.0;
  /// True when some computed eigenvalue lies above hi, so that no uncomputed
  /// eigenvalue can increase gamma.
  bool gamma_exact = false;
};

ClusterWindow make_window(const EigenPairs& pairs, double lo, double hi, double target);

struct EigenvectorError {
  double energy = 0.0;
  double l2 = 0.0;
  double energy_squared_raw = 0.0;  ///< before clamping at zero
  double l2_squared_raw = 0.0;
};

/// Errors of u^e - Q u^e, Q the B-orthogonal projection onto the window's
/// eigenvectors, in the A_h energy norm and the L2(Gamma_h) norm.
EigenvectorError eigenvector_error(const ClusterWindow& window, const EigenPairs& pairs,
                                   const AssembledForms& forms, const ExtendedPairings& pairings);

/// sqrt(r^T A^{-1} r).
double defect_dual_norm(const Eigen::VectorXd& r, const SparseMatrix& A);

/// log(e0 / e1) / log(h0 / h1); empty when an error is not positive.
std::optional<double> eoc(double e0, double e1, double h0, double h1);

/// Killing field axis attached to CSV row j (z, x, y for j = 1, 2, 3).
std::optional<Axis> killing_axis_for_row(int j);

struct ConvergenceConfig {
  LevelSetSurface surface = LevelSetSurface::unit_sphere();
  int k = 1;
  int kg = 1;
  std::vector<int> levels;
  int num_eigs = 6;
  double eta_coeff = 1.0;
  std::vector<Axis> fields;  ///< Killing fields whose eigenvector errors are reported
  SolveOptions solver;
  int quad_degree = 0;       ///< 0: default of the assembly
  int area_quad_degree = 0;  ///< 0: default_area_quad_degree(kg)
  double window_lo = 0.0;
  double window_hi = 1.5;
  double target = 1.0;
  std::optional<std::filesystem::path> export_mesh_dir;
  std::optional<std::filesystem::path> export_matrices_dir;
};

/// One CSV row: a level and an eigen index j (1-based).
struct ConvergenceRecord {
  int level = 0;
  double h = 0.0;
  int ndof = 0;
  int j = 0;
  double lambda_h = 0.0;
  std::optional<double> lambda_exact;
  std::optional<double> ev_err;
  std::optional<double> ev_eoc;
  std::optional<double> evec_energy_err;
  std::optional<double> evec_energy_eoc;
  std::optional<double> evec_l2_err;
  std::optional<double> evec_l2_eoc;
  std::optional<double> area_err;
  std::optional<double> area_eoc;

  bool operator==(const ConvergenceRecord&) const = default;
};

/// Per-level quantities that do not fit the CSV rows.
struct LevelDiagnostics {
  int level = 0;
  double h = 0.0;
  int ndof = 0;
  double eta = 0.0;
  double area = 0.0;
  Eigen::VectorXd eigenvalues;
  Eigen::VectorXd residuals;
  std::string solver;
  int iterations = 0;
  ClusterWindow window;
  std::vector<Axis> fields;
  std::vector<double> defect_dual_norms;  ///< per field
  std::vector<EigenvectorError> eigenvector_errors;
  std::vector<double> interpolation_energy_errors;  ///< |||u^e - I u^e||| per field
  double seconds = 0.0;
};

struct ConvergenceStudy {
  std::vector<ConvergenceRecord> records;
  std::vector<LevelDiagnostics> levels;
};

ConvergenceStudy convergence_study(const ConvergenceConfig& config);

/// Maximum vector DOF count accepted per solver path.
inline constexpr int kMaxIterativeDofs = 200000;
inline constexpr int kMaxDenseDofs = 3000;

int default_area_quad_degree(int kg);

struct AreaRecord {
  int level = 0;
  double h = 0.0;
  double area = 0.0;
  double area_err = 0.0;
  std::optional<double> area_eoc;
};

std::vector<AreaRecord> area_study(const LevelSetSurface& surface, int kg, const std::vector<int>& levels,
                                   int quad_degree = 0);

void write_convergence_csv(std::ostream& out, const std::vector<ConvergenceRecord>& records);
std::vector<ConvergenceRecord> read_convergence_csv(std::istream& in);
void write_area_csv(std::ostream& out, const std::vector<AreaRecord>& records);

inline const char* kConvergenceCsvHeader =
    "level,h,ndof,j,lambda_h,lambda_exact,ev_err,ev_eoc,evec_energy_err,evec_energy_eoc,evec_l2_err,evec_l2_eoc,"
    "area_err,area_eoc";

}  // namespace surfeig
