#include <doctest.h>

#include <cmath>
#include <omp.h>

#include "surfeig/eigensolve.hpp"
#include "surfeig/errors.hpp"
#include "surfeig/fem.hpp"
#include "surfeig/mesh.hpp"

using namespace surfeig;

namespace {

const LevelSetSurface kUnit = LevelSetSurface::unit_sphere();

struct Problem {
  LinearSurfaceMesh mesh;
  ParametricMap map;
  FeSpace space;
  AssembledForms forms;

  Problem(int level, int k, int kg, AssemblyOptions opt = {}, const LevelSetSurface& s = kUnit)
      : mesh(icosphere(level, s)), map(mesh, kg, s), space(build_space(mesh, map, k)),
        forms(assemble(space, map, s, opt)) {}
};

double quad_form(const SparseMatrix& M, const Eigen::VectorXd& x) { return x.dot(M * x); }

Eigen::MatrixXd dense(const SparseMatrix& m) { return Eigen::MatrixXd(m); }

double interpolation_energy_error(const Problem& p, const KillingField& f) {
  const ExtendedPairings pr = extended_pairings(f, 1.0, p.space, p.map, kUnit, p.forms);
  const Eigen::VectorXd x = interpolate(f, p.space, p.map, kUnit);
  return std::sqrt(std::max(0.0, pr.a_ee - 2 * pr.a_vec.dot(x) + quad_form(p.forms.A, x)));
}

double interpolation_l2_error(const Problem& p, const KillingField& f) {
  const ExtendedPairings pr = extended_pairings(f, 1.0, p.space, p.map, kUnit, p.forms);
  const Eigen::VectorXd x = interpolate(f, p.space, p.map, kUnit);
  return std::sqrt(std::max(0.0, pr.b_ee - 2 * pr.b_vec.dot(x) + quad_form(p.forms.B, x)));
}

}  // namespace

TEST_CASE("space dimensions") {
  const auto m0 = icosphere(0, kUnit);
  const ParametricMap map0(m0, 1, kUnit);
  CHECK(build_space(m0, map0, 1).num_scalar_dofs() == 12);
  CHECK(build_space(m0, map0, 1).num_dofs() == 36);
  CHECK(build_space(m0, map0, 2).num_scalar_dofs() == 42);
  const auto m2 = icosphere(2, kUnit);
  CHECK(build_space(m2, ParametricMap(m2, 1, kUnit), 1).num_scalar_dofs() == 162);
  CHECK_THROWS_AS(build_space(m0, map0, 5), InputError);
  CHECK_THROWS_AS(build_space(m0, map0, 0), InputError);
}

TEST_CASE("assembled forms are symmetric, penalties semidefinite, mass definite") {
  for (int k = 1; k <= 3; ++k)
    for (int kg = 1; kg <= 3; ++kg) {
      const Problem p(1, k, kg);
      for (const SparseMatrix* m : {&p.forms.a_tilde, &p.forms.k_a, &p.forms.b_tilde, &p.forms.k_b, &p.forms.A,
                                    &p.forms.B})
        CHECK(asymmetry(*m) <= 1e-12 * max_abs(*m));
      CHECK(p.forms.quad_degree == 2 * (k + kg));
      CHECK(p.forms.eta == doctest::Approx(1.0 / (p.space.h * p.space.h)));
      if (p.space.num_dofs() <= 1500) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ka(dense(p.forms.k_a), Eigen::EigenvaluesOnly);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> kb(dense(p.forms.k_b), Eigen::EigenvaluesOnly);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> b(dense(p.forms.B), Eigen::EigenvaluesOnly);
        CHECK(ka.eigenvalues().minCoeff() >= -1e-12 * ka.eigenvalues().maxCoeff());
        CHECK(kb.eigenvalues().minCoeff() >= -1e-12 * kb.eigenvalues().maxCoeff());
        CHECK(b.eigenvalues().minCoeff() > 0.0);
      }
    }
}

TEST_CASE("mass form of a constant field equals the discrete area") {
  for (int k = 1; k <= 2; ++k)
    for (int kg = 1; kg <= 3; ++kg) {
      const Problem p(2, k, kg);
      for (int c = 0; c < 3; ++c) {
        Eigen::VectorXd x = Eigen::VectorXd::Zero(p.space.num_dofs());
        for (int s = 0; s < p.space.num_scalar_dofs(); ++s) x(p.space.dof(c, s)) = 1.0;
        CHECK(quad_form(p.forms.B, x) == doctest::Approx(surface_area(p.map, p.forms.quad_degree)).epsilon(1e-10));
      }
      // B reproduces the full inner product: a constant field u = (1, 2, 3) has |u|^2 = 14
      Eigen::VectorXd x(p.space.num_dofs());
      for (int c = 0; c < 3; ++c)
        for (int s = 0; s < p.space.num_scalar_dofs(); ++s) x(p.space.dof(c, s)) = c + 1.0;
      CHECK(quad_form(p.forms.B, x) == doctest::Approx(14.0 * surface_area(p.map, p.forms.quad_degree)).epsilon(1e-10));
    }
}

TEST_CASE("interpolation reproduces constants") {
  const Problem p(1, 3, 2);
  const Eigen::VectorXd x = interpolate([](const Vec3&) { return Vec3(1.5, -2, 0.25); }, p.space, p.map, kUnit);
  for (int s = 0; s < p.space.num_scalar_dofs(); ++s) {
    CHECK(x(p.space.dof(0, s)) == 1.5);
    CHECK(x(p.space.dof(1, s)) == -2.0);
    CHECK(x(p.space.dof(2, s)) == 0.25);
  }
}

TEST_CASE("Rayleigh quotient of the interpolated Killing field is 1 + O(h^2)") {
  double prev = 0.0, hprev = 0.0;
  for (int level = 2; level <= 4; ++level) {
    const Problem p(level, 1, 1);
    const Eigen::VectorXd x = interpolate(KillingField{Axis::Z}, p.space, p.map, kUnit);
    const double err = std::abs(quad_form(p.forms.A, x) / quad_form(p.forms.B, x) - 1.0);
    CHECK(err < 2.0 * p.space.h * p.space.h);
    if (level > 2) CHECK(std::log(prev / err) / std::log(hprev / p.space.h) > 1.7);
    prev = err;
    hprev = p.space.h;
  }
}

TEST_CASE("interpolation error rates") {
  const KillingField u1{Axis::Z};
  const Problem a(2, 2, 2), b(3, 2, 2);
  const double energy_rate = std::log(interpolation_energy_error(a, u1) / interpolation_energy_error(b, u1)) /
                             std::log(a.space.h / b.space.h);
  CHECK(energy_rate > 1.7);

  const Problem c(2, 1, 1), d(3, 1, 1);
  const double l2_rate = std::log(interpolation_l2_error(c, u1) / interpolation_l2_error(d, u1)) /
                         std::log(c.space.h / d.space.h);
  CHECK(l2_rate == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("extended pairings of a Killing field") {
  const double exact = 8.0 * M_PI / 3.0;
  double prev_b = 1e9, prev_a = 1e9;
  for (int level = 1; level <= 3; ++level) {
    const Problem p(level, 2, 2);
    const ExtendedPairings pr = extended_pairings(KillingField{Axis::Z}, 1.0, p.space, p.map, kUnit, p.forms);
    CHECK((pr.r - (pr.a_vec - pr.b_vec)).norm() == 0.0);
    const double eb = std::abs(pr.b_ee - exact), ea = std::abs(pr.a_ee - exact);
    CHECK(eb < prev_b);
    CHECK(ea < prev_a);
    prev_b = eb;
    prev_a = ea;
    const ExtendedPairings p2 = extended_pairings(KillingField{Axis::Z}, 2.0, p.space, p.map, kUnit, p.forms);
    CHECK((p2.r - (pr.a_vec - 2.0 * pr.b_vec)).norm() <= 1e-14 * pr.a_vec.norm());
  }
  CHECK(prev_b < 1e-4);
  CHECK(prev_a < 1e-3);
}

TEST_CASE("penalty of the interpolated Killing field") {
  // isoparametric: I u = omega x x_h, which is orthogonal to the exact normal at x_h
  {
    const Problem p(2, 2, 2);
    const Eigen::VectorXd x = interpolate(KillingField{Axis::X}, p.space, p.map, kUnit);
    CHECK(std::abs(quad_form(p.forms.k_a, x)) <= 1e-12 * p.forms.eta);
  }
  double prev = 1e9;
  for (int level = 1; level <= 4; ++level) {
    const Problem p(level, 2, 1);
    const Eigen::VectorXd x = interpolate(KillingField{Axis::X}, p.space, p.map, kUnit);
    const double ka = quad_form(p.forms.k_a, x);
    CHECK(ka < prev);
    prev = ka;
  }
}

TEST_CASE("smallest discrete eigenvalue stays positive and the Friedrichs constant bounded") {
  for (int k = 1; k <= 2; ++k)
    for (int kg = 1; kg <= 2; ++kg)
      for (int level = 0; level <= 2; ++level) {
        const Problem p(level, k, kg);
        const EigenPairs e = solve_smallest(p.forms.A, p.forms.B, 1);
        CHECK(e.values(0) >= 0.5);
        CHECK(1.0 / std::sqrt(e.values(0)) <= std::sqrt(2.0));
      }
}

TEST_CASE("quadrature sufficiency") {
  // flat facets: the mass form is polynomial and integrated exactly
  {
    AssemblyOptions hi;
    hi.quad_degree = 8;
    const Problem p(2, 1, 1), q(2, 1, 1, hi);
    CHECK(max_abs(SparseMatrix(p.forms.B - q.forms.B)) <= 1e-13 * max_abs(p.forms.B));
  }
  // the exact curvature and normal make the other integrands non-polynomial
  for (int k = 1; k <= 2; ++k)
    for (int kg = 1; kg <= 2; ++kg) {
      AssemblyOptions hi;
      hi.quad_degree = 4 * (k + kg);
      const Problem p(2, k, kg), q(2, k, kg, hi);
      CHECK(max_abs(SparseMatrix(p.forms.A - q.forms.A)) <= 1e-5 * max_abs(p.forms.A));
      CHECK(max_abs(SparseMatrix(p.forms.B - q.forms.B)) <= 1e-7 * max_abs(p.forms.B));
    }
}

TEST_CASE("assembly does not depend on the thread count") {
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const Problem one(3, 2, 2);
  omp_set_num_threads(4);
  const Problem four(3, 2, 2);
  omp_set_num_threads(saved);
  for (auto pick : {&AssembledForms::A, &AssembledForms::B, &AssembledForms::k_a}) {
    const SparseMatrix& x = one.forms.*pick;
    const SparseMatrix& y = four.forms.*pick;
    REQUIRE(x.nonZeros() == y.nonZeros());
    bool same = true;
    for (int i = 0; i < x.nonZeros(); ++i)
      same = same && x.valuePtr()[i] == y.valuePtr()[i] && x.innerIndexPtr()[i] == y.innerIndexPtr()[i];
    CHECK(same);
  }
}
