#include "surfeig/geometry.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "surfeig/errors.hpp"

namespace surfeig {

LevelSetSurface LevelSetSurface::sphere(double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw InputError("sphere radius must be positive");
  }
  return LevelSetSurface(radius == 1.0 ? Kind::UnitSphere : Kind::Sphere, radius);
}

double LevelSetSurface::area() const { return 4.0 * std::numbers::pi * radius_ * radius_; }

SurfaceFrame surface_frame(const LevelSetSurface& surface, const Vec3& x) {
  const double r = surface.radius();
  const double len = x.norm();
  const double d = len - r;
  if (!(std::abs(d) < surface.tube_width())) {
    std::ostringstream msg;
    msg << "point (" << x.transpose() << ") lies outside the tubular neighborhood (|d| = "
        << std::abs(d) << ")";
    throw DomainError(msg.str());
  }
  SurfaceFrame f;
  f.x = x;
  f.d = d;
  f.n = x / len;
  f.p = r * f.n;
  f.P = Mat3::Identity() - f.n * f.n.transpose();
  f.H = f.P / len;
  return f;
}

Vec3 KillingField::omega() const {
  switch (axis) {
    case Axis::X: return Vec3::UnitX();
    case Axis::Y: return Vec3::UnitY();
    case Axis::Z: break;
  }
  return Vec3::UnitZ();
}

const char* axis_name(Axis axis) {
  switch (axis) {
    case Axis::X: return "x";
    case Axis::Y: return "y";
    case Axis::Z: break;
  }
  return "z";
}

Axis parse_axis(const std::string& name) {
  if (name == "x") return Axis::X;
  if (name == "y") return Axis::Y;
  if (name == "z") return Axis::Z;
  throw InputError("unknown Killing field axis '" + name + "'");
}

Mat3 cross_matrix(const Vec3& w) {
  Mat3 m;
  m << 0.0, -w.z(), w.y(),
       w.z(), 0.0, -w.x(),
       -w.y(), w.x(), 0.0;
  return m;
}

KillingValue killing_eval(const LevelSetSurface& surface, const KillingField& field, const Vec3& x) {
  const SurfaceFrame f = surface_frame(surface, x);
  const Vec3 w = field.omega();
  KillingValue out;
  out.value = w.cross(f.p);
  // d/dx [r x/|x|] = r P / |x|
  out.jacobian = cross_matrix(w) * (surface.radius() / x.norm()) * f.P;
  return out;
}

}  // namespace surfeig
