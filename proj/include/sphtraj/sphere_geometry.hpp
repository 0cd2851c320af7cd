#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "sphtraj/errors.hpp"

namespace sphtraj {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Points closer than this (in 1 + <p,q>) are treated as antipodal.
inline constexpr double kAntipodalTol = 1e-12;
/// Inputs whose norm is within this of 1 are renormalized instead of rejected.
inline constexpr double kRenormalizeTol = 1e-6;
/// Radial components below this are projected out of tangent vectors.
inline constexpr double kTangencyTol = 1e-6;

/// A unit 3-vector.
class SpherePoint {
 public:
  /// Renormalizes inputs with |norm - 1| <= 1e-6; throws InvalidPoint otherwise.
  explicit SpherePoint(const Vec3& coords);
  SpherePoint(double x, double y, double z) : SpherePoint(Vec3(x, y, z)) {}

  const Vec3& coords() const noexcept { return coords_; }
  double x() const noexcept { return coords_.x(); }
  double y() const noexcept { return coords_.y(); }
  double z() const noexcept { return coords_.z(); }

  bool operator==(const SpherePoint& other) const noexcept { return coords_ == other.coords_; }

 private:
  Vec3 coords_;
};

/// A 3-vector tangent to the sphere at `base`.
class TangentVector {
 public:
  /// Projects out radial components below 1e-6; throws NotTangent for larger ones.
  TangentVector(const SpherePoint& base, const Vec3& vec);

  static TangentVector zero(const SpherePoint& base) { return TangentVector(base, Vec3::Zero()); }

  const SpherePoint& base() const noexcept { return base_; }
  const Vec3& vec() const noexcept { return vec_; }
  double norm() const { return vec_.norm(); }

 private:
  SpherePoint base_;
  Vec3 vec_;
};

/// Proper rotation of R^3.
class Rotation3 {
 public:
  /// Throws InvalidRotation unless M^T M = I and det M = +1 within 1e-9.
  explicit Rotation3(const Mat3& matrix);

  static Rotation3 identity() { return Rotation3(Mat3::Identity()); }

  const Mat3& matrix() const noexcept { return matrix_; }
  Vec3 operator*(const Vec3& v) const { return matrix_ * v; }
  SpherePoint operator*(const SpherePoint& p) const { return SpherePoint(matrix_ * p.coords()); }

 private:
  Mat3 matrix_;
};

// Closed-form Riemannian tools on the unit sphere.

/// Point at fraction t along the great circle from p to q.
SpherePoint geodesic_point(const SpherePoint& p, const SpherePoint& q, double t);

/// Transports v (tangent at v.base()) to q along the shortest great circle.
TangentVector parallel_transport(const TangentVector& v, const SpherePoint& q);

SpherePoint exp_map(const TangentVector& v);

TangentVector log_map(const SpherePoint& p, const SpherePoint& q);

/// Great-circle distance; defined for every pair including antipodes.
double geodesic_distance(const SpherePoint& p, const SpherePoint& q);

/// R(x,y)z = <y,z>x - <x,z>y. All three vectors must share a base point.
TangentVector curvature_tensor(const TangentVector& x, const TangentVector& y,
                               const TangentVector& z);

/// Rotation by theta about a unit axis.
Rotation3 rodrigues_rotation(const SpherePoint& axis, double theta);

/// Unchecked kernels on raw 3-vectors, used by the hot loops of the
/// trajectory and bundle code. Callers guarantee unit points and tangency.
namespace s2 {

Mat3 skew(const Vec3& v);
Vec3 vee(const Mat3& m);

Vec3 project_tangent(const Vec3& p, const Vec3& v);

/// Linear map of the closed-form transport T_p -> T_q (valid on T_p only).
Mat3 transport_matrix(const Vec3& p, const Vec3& q);

Vec3 exp(const Vec3& p, const Vec3& v);
Vec3 log(const Vec3& p, const Vec3& q);
double distance(const Vec3& p, const Vec3& q);

/// Constant-speed great-circle interpolation; tolerates p == q.
Vec3 slerp(const Vec3& p, const Vec3& q, double t);

/// exp of the skew matrix [omega]_x (Rodrigues).
Mat3 rotation_exp(const Vec3& omega);
/// Principal logarithm of a rotation as an axis-angle vector (angle in [0, pi]).
Vec3 rotation_log(const Mat3& rotation);

/// Deterministic unit tangent at p: normalize(e3 x p), or normalize(e1 x p) near the poles.
Vec3 seed_tangent(const Vec3& p);

}  // namespace s2

}  // namespace sphtraj
