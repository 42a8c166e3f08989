#include <doctest.h>

#include <sstream>

#include "surfeig/analysis.hpp"
#include "surfeig/errors.hpp"
#include "surfeig/mesh.hpp"

using namespace surfeig;

namespace {

const LevelSetSurface kUnit = LevelSetSurface::unit_sphere();

EigenPairs pairs_from(std::vector<double> values) {
  EigenPairs p;
  p.values = Eigen::Map<Eigen::VectorXd>(values.data(), values.size());
  p.vectors = Eigen::MatrixXd::Identity(values.size(), values.size());
  return p;
}

ConvergenceConfig small_config(int k, int kg, std::vector<int> levels) {
  ConvergenceConfig c;
  c.k = k;
  c.kg = kg;
  c.levels = std::move(levels);
  c.fields = {Axis::Z, Axis::X, Axis::Y};
  return c;
}

}  // namespace

TEST_CASE("exact sphere eigenvalues") {
  CHECK(exact_sphere_eigenvalues(1) == std::vector<double>{1.0});
  CHECK(exact_sphere_eigenvalues(6) == std::vector<double>{1, 1, 1, 2, 2, 2});
  CHECK_THROWS_AS(exact_sphere_eigenvalues(7), UnsupportedError);
  CHECK_THROWS_AS(exact_sphere_eigenvalues(0), InputError);
}

TEST_CASE("experimental order of convergence") {
  CHECK(*eoc(4.0, 1.0, 0.2, 0.1) == doctest::Approx(2.0));
  CHECK(*eoc(1.0, 1.0 / 27.0, 3.0, 1.0) == doctest::Approx(3.0));
  CHECK_FALSE(eoc(0.0, 1.0, 0.2, 0.1).has_value());
  CHECK_FALSE(eoc(1.0, -1.0, 0.2, 0.1).has_value());
}

TEST_CASE("Killing rows") {
  CHECK(*killing_axis_for_row(1) == Axis::Z);
  CHECK(*killing_axis_for_row(2) == Axis::X);
  CHECK(*killing_axis_for_row(3) == Axis::Y);
  CHECK_FALSE(killing_axis_for_row(4).has_value());
}

TEST_CASE("cluster window and gap") {
  const ClusterWindow w = make_window(pairs_from({0.99, 1.0, 1.01, 2.0, 2.05}), 0.0, 1.5, 1.0);
  CHECK(w.members == std::vector<int>{0, 1, 2});
  CHECK(w.gamma == doctest::Approx(2.0));
  CHECK(w.gamma_exact);
  const ClusterWindow open = make_window(pairs_from({0.99, 1.0}), 0.0, 1.5, 1.0);
  CHECK_FALSE(open.gamma_exact);
  const ClusterWindow none = make_window(pairs_from({3.0, 4.0}), 0.0, 1.5, 1.0);
  CHECK(none.members.empty());
}

TEST_CASE("dual norm of the defect") {
  SparseMatrix I(2, 2);
  I.setIdentity();
  CHECK(defect_dual_norm(Eigen::Vector2d(3, 4), I) == doctest::Approx(5.0));
  CHECK(defect_dual_norm(Eigen::Vector2d(0, 0), I) == 0.0);
  SparseMatrix D = I * 4.0;
  CHECK(defect_dual_norm(Eigen::Vector2d(3, 4), D) == doctest::Approx(2.5));
}

TEST_CASE("eigenvector error against the window") {
  const auto mesh = icosphere(2, kUnit);
  const ParametricMap map(mesh, 2, kUnit);
  const FeSpace space = build_space(mesh, map, 2);
  const AssembledForms forms = assemble(space, map, kUnit);
  const EigenPairs pairs = solve_smallest(forms.A, forms.B, 8);
  const ExtendedPairings pr = extended_pairings(KillingField{Axis::Z}, 1.0, space, map, kUnit, forms);

  CHECK_THROWS_AS(eigenvector_error(make_window(pairs, 10.0, 20.0, 15.0), pairs, forms, pr), InputError);

  const ClusterWindow w = make_window(pairs, 0.0, 1.5, 1.0);
  REQUIRE(w.members.size() == 3);
  CHECK(w.gamma > 1.5);
  CHECK(w.gamma < 2.5);
  const EigenvectorError e = eigenvector_error(w, pairs, forms, pr);

  // energy error is at most a moderate multiple of the interpolation error
  const Eigen::VectorXd x = interpolate(KillingField{Axis::Z}, space, map, kUnit);
  const double interp = std::sqrt(pr.a_ee - 2 * pr.a_vec.dot(x) + x.dot(forms.A * x));
  CHECK(e.energy <= 10.0 * interp);
  CHECK(e.l2 <= e.energy);

  // Pythagoras in the energy and mass inner products
  Eigen::MatrixXd X(pairs.vectors.rows(), 3);
  for (int i = 0; i < 3; ++i) X.col(i) = pairs.vectors.col(w.members[i]);
  const Eigen::VectorXd cb = X.transpose() * pr.b_vec;
  CHECK(e.l2_squared_raw == doctest::Approx(pr.b_ee - cb.squaredNorm()).epsilon(1e-8));
  Eigen::VectorXd ca = X.transpose() * pr.a_vec;
  double proj_energy = 0.0;
  for (int i = 0; i < 3; ++i) proj_energy += 2 * cb(i) * ca(i) - cb(i) * cb(i) * pairs.values(w.members[i]);
  CHECK(e.energy_squared_raw == doctest::Approx(pr.a_ee - proj_energy).epsilon(1e-8));
}

TEST_CASE("small convergence study") {
  ConvergenceConfig c = small_config(1, 1, {1, 2, 3});
  const ConvergenceStudy s = convergence_study(c);
  REQUIRE(s.records.size() == 18);
  REQUIRE(s.levels.size() == 3);
  for (const auto& r : s.records) {
    CHECK(r.lambda_h > 0.0);
    CHECK(r.lambda_exact.has_value());
    if (r.j <= 3) CHECK(r.evec_energy_err.has_value());
    else CHECK_FALSE(r.evec_energy_err.has_value());
    if (r.level == 1) CHECK_FALSE(r.ev_eoc.has_value());
  }
  const auto& last = s.records[12];
  CHECK(last.level == 3);
  CHECK(last.j == 1);
  CHECK(*last.ev_eoc == doctest::Approx(2.0).epsilon(0.15));
  CHECK(*last.evec_energy_eoc == doctest::Approx(1.0).epsilon(0.2));
  CHECK(*last.evec_l2_eoc > 1.7);
  CHECK(*last.area_eoc == doctest::Approx(2.0).epsilon(0.1));

  // clusters coherent: the three rotation eigenvalues stay close to each other
  for (const auto& d : s.levels) {
    CHECK(d.window.members.size() == 3);
    CHECK(d.eigenvalues(2) - d.eigenvalues(0) < 0.1);
    CHECK(d.eigenvalues(3) > 1.5);
    CHECK(d.ndof == 3 * (10 * (1 << (2 * d.level)) + 2));
  }

  std::stringstream csv;
  write_convergence_csv(csv, s.records);
  CHECK(csv.str().rfind(kConvergenceCsvHeader, 0) == 0);
  const auto back = read_convergence_csv(csv);
  REQUIRE(back.size() == s.records.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].level == s.records[i].level);
    CHECK(back[i].j == s.records[i].j);
    CHECK(back[i].lambda_h == doctest::Approx(s.records[i].lambda_h).epsilon(1e-14));
    CHECK(back[i].ev_eoc.has_value() == s.records[i].ev_eoc.has_value());
  }
}

TEST_CASE("convergence study on a sphere of radius 2") {
  // on coarse meshes of a large sphere eta = 1 / h^2 is too weak to push normal modes above the window
  ConvergenceConfig c = small_config(2, 2, {2, 3});
  c.surface = LevelSetSurface::sphere(2.0);
  c.solver.method = SolverMethod::Iterative;
  c.window_hi = 1.1;
  const ConvergenceStudy s = convergence_study(c);
  for (const auto& r : s.records) {
    if (r.j <= 3) {
      CHECK(*r.lambda_exact == 1.0);
      CHECK(std::abs(r.lambda_h - 1.0) < 0.01);
    } else {
      CHECK_FALSE(r.lambda_exact.has_value());
      CHECK(r.lambda_h == doctest::Approx(1.25).epsilon(0.02));
    }
  }
}

TEST_CASE("convergence configuration validation") {
  CHECK_THROWS_AS(convergence_study(small_config(0, 1, {1})), InputError);
  CHECK_THROWS_AS(convergence_study(small_config(1, 5, {1})), InputError);
  CHECK_THROWS_AS(convergence_study(small_config(5, 1, {1})), InputError);
  CHECK_THROWS_AS(convergence_study(small_config(1, 1, {})), InputError);
  CHECK_THROWS_AS(convergence_study(small_config(1, 1, {2, 1})), InputError);
  ConvergenceConfig c = small_config(1, 1, {1});
  c.num_eigs = 0;
  CHECK_THROWS_AS(convergence_study(c), InputError);
  c.num_eigs = 7;
  const ConvergenceStudy s = convergence_study(c);
  REQUIRE(s.records.size() == 7);
  CHECK_FALSE(s.records[6].lambda_exact.has_value());
  CHECK_FALSE(s.records[6].ev_err.has_value());
}

TEST_CASE("area study") {
  const auto rows = area_study(kUnit, 2, {1, 2, 3});
  REQUIRE(rows.size() == 3);
  CHECK_FALSE(rows[0].area_eoc.has_value());
  CHECK(*rows[2].area_eoc > 3.0);
  for (const auto& r : rows) CHECK(r.area_err == doctest::Approx(std::abs(r.area - 4 * M_PI)));
  std::stringstream out;
  write_area_csv(out, rows);
  CHECK(out.str().rfind("level,h,area_h,area_err,area_eoc\n", 0) == 0);
}
