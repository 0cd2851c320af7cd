#pragma once

#include "sphtraj/trajectory.hpp"

namespace sphtraj {

/// A circular arc beta(s) = exp(s A) p1, s in [0, 1], with A antisymmetric.
///
/// Parallel transport along the arc has the closed form
///   P(s) = exp(s A) * Rot_{p1}(-s <omega, p1>),
/// where omega is the axis-angle vector of A: the rigid rotation drags the
/// tangent plane along and the second factor removes the twist the rotation
/// adds relative to the Levi-Civita connection. For a great circle
/// (<omega, p1> = 0) this reduces to the rotation itself.
struct ArcBaseline {
  double theta = 0.0;
  Mat3 generator = Mat3::Zero();
  SpherePoint p1;
  SpherePoint p2;

  /// Arc exp(s [omega]_x) p1; p2 is evaluated from the generator.
  static ArcBaseline from_generator(const SpherePoint& p1, const Vec3& omega, double theta = 0.0);
  /// The constant path at p.
  static ArcBaseline constant(const SpherePoint& p);

  Vec3 omega() const { return s2::vee(generator); }
  Vec3 point(double s) const;
  /// |beta'(s)|, constant along the arc.
  double speed() const { return (generator * p1.coords()).norm(); }
  /// Transport T_{p1} -> T_{beta(s)}; its transpose transports back.
  Mat3 transport(double s = 1.0) const;
};

/// Search settings for the baseline angle theta.
struct GeodesicOptions {
  int theta_grid = 72;
  double theta_tol = 1e-4;
};

/// Member of the circular-arc family from p1 to p2 indexed by theta in [0, 2 pi).
ArcBaseline arc_family(const SpherePoint& p1, const SpherePoint& p2, double theta);

/// arc_family(p1, p2, theta), or the constant path when p1 and p2 coincide within 1e-9.
ArcBaseline connecting_arc(const SpherePoint& p1, const SpherePoint& p2, double theta);

/// Transports each q(k) (tangent at arc.p1) along the arc to arc.p2.
TangentCurve transport_along_arc(const TangentCurve& q, const ArcBaseline& arc);
/// Transports each q(k) (tangent at arc.p2) back to arc.p1.
TangentCurve transport_back_along_arc(const TangentCurve& q, const ArcBaseline& arc);

/// sqrt(l_beta^2 + int |q1 transported - q2|^2 dt).
double path_length(const TsrvcPair& a, const TsrvcPair& b, const ArcBaseline& arc);

struct BundleGeodesic {
  ArcBaseline baseline;
  TsrvcPair start;
  /// q2 transported back to p1, minus q1.
  TangentCurve w;
  double length = 0.0;

  /// Point of the geodesic at s in [0, 1].
  TsrvcPair at(double s) const;
};

BundleGeodesic geodesic(const TsrvcPair& a, const TsrvcPair& b, const GeodesicOptions& options = {});

/// Tangent vector (u, w) to the bundle at a point with start `base`.
struct BundleTangent {
  SpherePoint base;
  Vec3 u;
  TangentCurve w;

  static BundleTangent zero(const SpherePoint& base, std::size_t size);

  BundleTangent scaled(double factor) const;
  double norm() const;
};

/// <(u1,w1),(u2,w2)> = u1.u2 + int w1.w2 dt.
double bundle_inner(const BundleTangent& a, const BundleTangent& b);

/// Axis-angle vector of the baseline generator solved from A p1 = u and the
/// projected second-derivative condition at s = 0 (least squares).
Vec3 solve_generator(const TsrvcPair& base, const BundleTangent& v);

/// exp_{(p1,q1)}(s (u, w)) = (exp(s A) p1, (q1 + s w) transported along the arc).
TsrvcPair bundle_exp(const TsrvcPair& base, const BundleTangent& v, double s = 1.0);

/// Shooting vector (A p1, P^T q2 - q1) from a to b along a given baseline arc.
BundleTangent log_along(const TsrvcPair& a, const TsrvcPair& b, const ArcBaseline& arc);

/// Shooting vector from a to b along the bundle geodesic.
BundleTangent bundle_log(const TsrvcPair& a, const TsrvcPair& b, const GeodesicOptions& options = {});

namespace detail {

/// Golden-section minimization of f on [lo, hi]; returns (argmin, min).
template <class F>
std::pair<double, double> golden_section(F&& f, double lo, double hi, double tol) {
  constexpr double kInvPhi = 0.6180339887498949;
  double x1 = hi - kInvPhi * (hi - lo);
  double x2 = lo + kInvPhi * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  while (hi - lo > tol) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kInvPhi * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kInvPhi * (hi - lo);
      f2 = f(x2);
    }
  }
  return f1 <= f2 ? std::pair{x1, f1} : std::pair{x2, f2};
}

double wrap_angle(double theta);

}  // namespace detail

}  // namespace sphtraj
