#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace surfeig {

enum class ConsistencyMode {
  Exact,      ///< discrete forms equal the lifted continuous ones, penalties vanish on range(E)
  Perturbed,  ///< forms and penalties perturbed by congruences close to the identity
};

ConsistencyMode parse_consistency_mode(const std::string& name);
const char* mode_name(ConsistencyMode mode);

/// Parameters of a synthetic instance. Negative values of the optional
/// parameters request a seeded random choice.
struct InstanceSpec {
  int N = 8;       ///< dim H
  int N_ex = 12;   ///< dim H^ex
  int n_h = 10;    ///< dim V_h
  int k_max = 3;
  ConsistencyMode mode = ConsistencyMode::Exact;
  double delta_a = -1.0;
  double delta_b = -1.0;
  double vh_noise = -1.0;  ///< distance of V_h from E(U_kmax); 0 makes V_h contain it
  double s_a = -1.0;       ///< penalty scales
  double s_b = -1.0;
  bool enforce_stability = true;  ///< raise s_a until the penalty dominance condition holds
  std::vector<double> spectrum;   ///< continuous eigenvalues; empty: random
};

/// Finite-dimensional model: H = R^N with forms a, b; H^ex = R^N_ex;
/// V_h = range(Vh). All matrices act on coordinate vectors.
struct SyntheticInstance {
  InstanceSpec spec;
  std::uint64_t seed = 0;

  Eigen::VectorXd lambda;  ///< continuous eigenvalues, ascending
  Eigen::MatrixXd U;       ///< continuous eigenvectors, U^T b U = I, U^T a U = diag(lambda)
  Eigen::MatrixXd a, b;    ///< N x N

  Eigen::MatrixXd E;   ///< extension, N_ex x N
  Eigen::MatrixXd L;   ///< lifting, N x N_ex, L E = I
  Eigen::MatrixXd M;   ///< complement coordinates, (N_ex - N) x N_ex, M E = 0
  Eigen::MatrixXd Vh;  ///< N_ex x n_h basis of V_h

  Eigen::MatrixXd a_tilde, b_tilde, k_a, k_b;  ///< N_ex x N_ex
  double s_a = 0.0;
  double s_b = 0.0;
  double delta_a = 0.0;
  double delta_b = 0.0;
  double vh_noise = 0.0;
  int stability_doublings = 0;

  Eigen::MatrixXd A() const { return a_tilde + k_a; }
  Eigen::MatrixXd B() const { return b_tilde + k_b; }
  /// a(E^{-l} u, E^{-l} v) and b(E^{-l} u, E^{-l} v) on H^ex.
  Eigen::MatrixXd a_lifted() const { return L.transpose() * a * L; }
  Eigen::MatrixXd b_lifted() const { return L.transpose() * b * L; }
  /// E U_j: extended eigenvectors u_1^e .. u_j^e as columns.
  Eigen::MatrixXd extended_eigenvectors(int j) const { return E * U.leftCols(j); }
};

SyntheticInstance make_instance(const InstanceSpec& spec, std::uint64_t seed);

/// H = H^ex = V_h = R^N, no penalties, a_h = (1 + delta) a, b_h = (1 - delta) b.
SyntheticInstance make_scaled_instance(int N, double delta, std::uint64_t seed);

/// Data attached to one target eigenpair (lambda_k, u_k) and its window.
struct TargetQuantities {
  int k = 0;  ///< 1-based index of the continuous eigenpair
  double lambda = 0.0;
  double lo = 0.0, hi = 0.0;  ///< window around the cluster of lambda_k
  std::vector<int> members;   ///< discrete indices inside the window
  double gamma = 0.0;
  Eigen::VectorXd ue;          ///< u_k^e
  Eigen::VectorXd defect;      ///< d_lambda(u^e, u~_i) for all i
  double dual_norm = 0.0;        ///< sqrt(r^T A^{-1} r) on V_h
  double dual_norm_basis = 0.0;  ///< sqrt(sum_i d_lambda(u^e, u^_i)^2)
  double q = 0.0;                ///< sqrt(sum over i outside the window of d_lambda(u^e, u^_i)^2 / lambda~_i)
  double q_dual = 0.0;           ///< max over W_h of d(u^e, v) / |L_h v|_h, evaluated independently
};

struct FrameworkQuantities {
  Eigen::VectorXd lambda_tilde;  ///< all n_h discrete eigenvalues
  Eigen::MatrixXd U_tilde;       ///< N_ex x n_h, B-orthonormal discrete eigenvectors

  Eigen::VectorXd theta;  ///< Theta_{h,j}, j = 1..k_max
  Eigen::VectorXd phi;    ///< Phi_{h,m}, m = 1..k_max
  double alpha1 = 0.0, alpha2 = 0.0, beta1 = 0.0, beta2 = 0.0;
  double alpha = 0.0, beta = 0.0;
  double alpha_tilde = 0.0, beta_tilde = 0.0;
  double alpha_hat = 0.0, beta_hat = 0.0;
  double c_F = 0.0;
  double c_hat = 0.0;  ///< 8 / sqrt(3) c_F lambda_kmax^{1/2}

  bool approximability_ok = false;  ///< Theta_{h,k_max} < 1
  bool stability = false;           ///< penalty dominance with the Theta-dependent constant
  bool stability_discrete = false;  ///< penalty dominance with lambda~_kmax

  Eigen::MatrixXd P_h;  ///< a_h-orthogonal projection onto V_h
  Eigen::MatrixXd Q_h;  ///< b_h-orthogonal projection onto V_h
  std::vector<TargetQuantities> targets;
};

FrameworkQuantities compute_quantities(const SyntheticInstance& inst);

/// a_h- and b_h-orthogonal projections onto U_j^e.
Eigen::MatrixXd projection_a(const SyntheticInstance& inst, int j);
Eigen::MatrixXd projection_b(const SyntheticInstance& inst, int j);
/// Q_h^Lambda and R_h^Lambda for a window [lo, hi] and reference value lambda.
Eigen::MatrixXd window_projection(const SyntheticInstance& inst, const FrameworkQuantities& q, double lo, double hi);
Eigen::MatrixXd window_resolvent(const SyntheticInstance& inst, const FrameworkQuantities& q, double lo, double hi,
                                 double lambda);

/// Largest |f(u, v)| / (|u|_G1 |v|_G2) over u in range(Z1), v in range(Z2).
double sup_bilinear(const Eigen::MatrixXd& F, const Eigen::MatrixXd& Z1, const Eigen::MatrixXd& G1,
                    const Eigen::MatrixXd& Z2, const Eigen::MatrixXd& G2);

/// Extreme values of the Rayleigh quotient x^T N x / x^T D x over range(Z).
struct RatioRange {
  double min = 0.0;
  double max = 0.0;
};
RatioRange ratio_range(const Eigen::MatrixXd& N, const Eigen::MatrixXd& D, const Eigen::MatrixXd& Z);

/// Orthonormal basis of the column span, dropping dependent directions.
Eigen::MatrixXd orthonormal_basis(const Eigen::MatrixXd& X);

/// Outcome of one inequality check lhs <= rhs (worst case over all tested
/// indices, vectors and windows).
struct BoundCheck {
  std::string bound;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;         ///< rhs - lhs of the worst case
  bool hypotheses_met = false;
  bool pass = true;
  int checks = 0;             ///< individual comparisons with hypotheses met
  int skipped = 0;            ///< individual comparisons whose hypotheses failed
};

struct BoundCheckReport {
  std::uint64_t seed = 0;
  ConsistencyMode mode = ConsistencyMode::Exact;
  std::vector<BoundCheck> checks;

  bool all_pass() const;
  const BoundCheck& find(const std::string& bound) const;
};

/// Relative tolerance for floating-point comparisons in the bound checks.
inline constexpr double kBoundTolerance = 1e-10;

BoundCheckReport verify_bounds(const SyntheticInstance& inst);
BoundCheckReport verify_bounds(const SyntheticInstance& inst, const FrameworkQuantities& q);

/// Closed-form eigenvalue and consistency check for make_scaled_instance.
BoundCheckReport verify_scaled_instance(const SyntheticInstance& inst);

void write_jsonl(std::ostream& out, const BoundCheckReport& report);

/// Runs `trials` instances with seeds seed, seed + 1, ... in the given mode
/// (plus the scaled-forms check per seed) and writes one JSON line per check.
std::vector<BoundCheckReport> run_trials(int trials, std::uint64_t seed, ConsistencyMode mode,
                                         const InstanceSpec& base = {});

}  // namespace surfeig
