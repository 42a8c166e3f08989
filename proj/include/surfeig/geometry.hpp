#pragma once

#include <string>

#include <Eigen/Dense>

namespace surfeig {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Analytic closed surface given as the zero level of a signed distance
/// function (negative inside). Only spheres centred at the origin are
/// available; the frame evaluation is the single point of extension for
/// other level sets.
class LevelSetSurface {
public:
  enum class Kind { UnitSphere, Sphere };

  static LevelSetSurface unit_sphere() { return LevelSetSurface(Kind::UnitSphere, 1.0); }
  static LevelSetSurface sphere(double radius);

  Kind kind() const noexcept { return kind_; }
  double radius() const noexcept { return radius_; }

  /// Half-width of the tubular neighborhood in which frames are defined.
  double tube_width() const noexcept { return 0.5 * radius_; }

  double area() const;

private:
  LevelSetSurface(Kind kind, double radius) : kind_(kind), radius_(radius) {}

  Kind kind_;
  double radius_;
};

/// Local differential geometry of the surface at an ambient point x.
struct SurfaceFrame {
  Vec3 x;
  double d = 0.0;  ///< signed distance
  Vec3 p;          ///< closest point on the surface
  Vec3 n;          ///< unit normal, outward
  Mat3 P;          ///< tangential projector I - n n^T
  Mat3 H;          ///< Weingarten map, Hessian of d
};

/// Throws DomainError when |d(x)| >= tube_width().
SurfaceFrame surface_frame(const LevelSetSurface& surface, const Vec3& x);

inline Vec3 closest_point(const LevelSetSurface& surface, const Vec3& x) {
  return surface_frame(surface, x).p;
}

enum class Axis { X, Y, Z };

const char* axis_name(Axis axis);
/// Accepts "x", "y" or "z".
Axis parse_axis(const std::string& name);

/// Rotation field omega x p(x) about a coordinate axis. On a sphere these span
/// the kernel of the tangential symmetric gradient.
struct KillingField {
  Axis axis = Axis::Z;

  Vec3 omega() const;
};

struct KillingValue {
  Vec3 value;
  Mat3 jacobian;  ///< ambient Jacobian of the constant-normal extension
};

KillingValue killing_eval(const LevelSetSurface& surface, const KillingField& field, const Vec3& x);

Mat3 cross_matrix(const Vec3& w);

}  // namespace surfeig
