#include <doctest.h>

#include <cmath>
#include <random>

#include "surfeig/errors.hpp"
#include "surfeig/geometry.hpp"

using namespace surfeig;

namespace {

Vec3 random_direction(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Vec3 v(g(rng), g(rng), g(rng));
  return v.normalized();
}

}  // namespace

TEST_CASE("surface frame at simple points of the unit sphere") {
  const auto s = LevelSetSurface::unit_sphere();
  const SurfaceFrame f = surface_frame(s, Vec3(1.4, 0, 0));
  CHECK(f.d == doctest::Approx(0.4));
  CHECK((f.p - Vec3(1, 0, 0)).norm() < 1e-15);
  CHECK((f.n - Vec3(1, 0, 0)).norm() < 1e-15);

  const SurfaceFrame top = surface_frame(s, Vec3(0, 0, 1));
  const Mat3 expected = Vec3(1, 1, 0).asDiagonal();
  CHECK((top.H - expected).norm() < 1e-15);

  const SurfaceFrame side = surface_frame(s, Vec3(0, 1, 0));
  CHECK((side.P * side.n).norm() < 1e-15);

  CHECK(surface_frame(s, Vec3(0.7, 0, 0)).d < 0.0);
  CHECK_THROWS_AS(surface_frame(s, Vec3(0.2, 0.1, 0)), DomainError);
  CHECK_THROWS_AS(LevelSetSurface::sphere(-1.0), InputError);
  CHECK(LevelSetSurface::sphere(2.0).area() == doctest::Approx(16.0 * M_PI));
}

TEST_CASE("closest point decomposition and projector in the tubular neighborhood") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> rad(0.55, 1.45);
  for (double r : {1.0, 2.5}) {
    const auto s = r == 1.0 ? LevelSetSurface::unit_sphere() : LevelSetSurface::sphere(r);
    for (int i = 0; i < 1000; ++i) {
      const Vec3 x = r * rad(rng) * random_direction(rng);
      const SurfaceFrame f = surface_frame(s, x);
      CHECK((x - f.p - f.d * f.n).norm() <= 1e-12 * r);
      CHECK(std::abs(f.n.norm() - 1.0) < 1e-14);
      CHECK((f.P * f.P - f.P).norm() < 1e-14);
      CHECK((f.P - f.P.transpose()).norm() < 1e-15);
      CHECK((f.P * f.n).norm() < 1e-14);
      CHECK((f.H - f.H.transpose()).norm() < 1e-14);
    }
  }
}

TEST_CASE("Weingarten map matches a finite-difference Hessian of the distance") {
  const double r = 1.7;
  const auto s = LevelSetSurface::sphere(r);
  auto dist = [&](const Vec3& x) { return x.norm() - r; };
  std::mt19937_64 rng(5);
  for (int i = 0; i < 20; ++i) {
    const Vec3 x = r * 1.1 * random_direction(rng);
    const double e = 1e-4;
    Mat3 fd;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        const Vec3 ea = e * Vec3::Unit(a), eb = e * Vec3::Unit(b);
        fd(a, b) = (dist(x + ea + eb) - dist(x + ea - eb) - dist(x - ea + eb) + dist(x - ea - eb)) / (4 * e * e);
      }
    CHECK((surface_frame(s, x).H - fd).norm() < 1e-6);
  }
  const SurfaceFrame on = surface_frame(s, Vec3(0, r, 0));
  CHECK((on.H - on.P / r).norm() < 1e-15);
  CHECK((on.H * on.n).norm() < 1e-15);
}

TEST_CASE("Killing field values") {
  const auto s = LevelSetSurface::unit_sphere();
  const KillingField z{Axis::Z};
  CHECK((killing_eval(s, z, Vec3(1, 0, 0)).value - Vec3(0, 1, 0)).norm() < 1e-15);
  CHECK(killing_eval(s, z, Vec3(0, 0, 1)).value.norm() < 1e-15);
  CHECK((killing_eval(s, z, Vec3(1.4, 0, 0)).value - Vec3(0, 1, 0)).norm() < 1e-15);
  CHECK_THROWS_AS(killing_eval(s, z, Vec3(0.1, 0, 0)), DomainError);
}

TEST_CASE("Killing extension Jacobian matches central differences") {
  std::mt19937_64 rng(3);
  const auto s = LevelSetSurface::sphere(1.3);
  const double step = 1e-5;
  for (Axis axis : {Axis::X, Axis::Y, Axis::Z}) {
    const KillingField f{axis};
    for (int i = 0; i < 50; ++i) {
      const Vec3 x = 1.3 * (0.8 + 0.4 * std::uniform_real_distribution<double>()(rng)) * random_direction(rng);
      const Mat3 J = killing_eval(s, f, x).jacobian;
      Mat3 fd;
      for (int c = 0; c < 3; ++c) {
        const Vec3 e = step * Vec3::Unit(c);
        fd.col(c) = (killing_eval(s, f, x + e).value - killing_eval(s, f, x - e).value) / (2 * step);
      }
      CHECK((J - fd).norm() <= 1e-6 * J.norm());
    }
  }
}

TEST_CASE("Killing fields are tangential and have vanishing symmetric surface gradient") {
  std::mt19937_64 rng(8);
  const auto s = LevelSetSurface::unit_sphere();
  for (Axis axis : {Axis::X, Axis::Y, Axis::Z}) {
    for (int i = 0; i < 1000; ++i) {
      const Vec3 x = random_direction(rng);
      const SurfaceFrame fr = surface_frame(s, x);
      const KillingValue kv = killing_eval(s, KillingField{axis}, x);
      CHECK(std::abs(kv.value.dot(fr.n)) <= 1e-12);
      const Mat3 G = fr.P * kv.jacobian * fr.P;
      CHECK((G + G.transpose()).norm() <= 1e-10);
    }
  }
}

TEST_CASE("axis names round-trip") {
  for (Axis a : {Axis::X, Axis::Y, Axis::Z}) CHECK(parse_axis(axis_name(a)) == a);
  CHECK_THROWS_AS(parse_axis("w"), InputError);
}
