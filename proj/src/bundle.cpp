#include "sphtraj/bundle.hpp"

#include <Eigen/QR>
#include <cmath>
#include <numbers>
#include <string>

namespace sphtraj {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_same_size(std::size_t a, std::size_t b) {
  if (a != b) {
    throw Error(ErrorCode::GridMismatch, std::to_string(a) + " vs " + std::to_string(b) + " samples");
  }
}

TangentCurve transform_curve(const Mat3& m, const TangentCurve& q) {
  TangentCurve out(q.size());
  for (std::size_t k = 0; k < q.size(); ++k) out[k] = m * q[k];
  return out;
}

// Squared L2 distance between P*a and b, without materializing P*a.
double transported_distance_sq(const Mat3& p, const TangentCurve& a, const TangentCurve& b) {
  const std::size_t n = a.size();
  double sum = 0.5 * ((p * a.front() - b.front()).squaredNorm() + (p * a.back() - b.back()).squaredNorm());
  for (std::size_t k = 1; k + 1 < n; ++k) sum += (p * a[k] - b[k]).squaredNorm();
  return sum * grid_step(n);
}

bool same_point(const SpherePoint& a, const SpherePoint& b) {
  return (a.coords() - b.coords()).norm() <= 1e-9;
}

}  // namespace

namespace detail {

double wrap_angle(double theta) {
  theta = std::fmod(theta, kTwoPi);
  return theta < 0.0 ? theta + kTwoPi : theta;
}

}  // namespace detail

// ArcBaseline -------------------------------------------------------------------

ArcBaseline ArcBaseline::from_generator(const SpherePoint& p1, const Vec3& omega, double theta) {
  return ArcBaseline{theta, s2::skew(omega), p1, SpherePoint(s2::rotation_exp(omega) * p1.coords())};
}

ArcBaseline ArcBaseline::constant(const SpherePoint& p) { return ArcBaseline{0.0, Mat3::Zero(), p, p}; }

Vec3 ArcBaseline::point(double s) const { return s2::rotation_exp(s * omega()) * p1.coords(); }

Mat3 ArcBaseline::transport(double s) const {
  const Vec3 w = omega();
  return s2::rotation_exp(s * w) * s2::rotation_exp(-s * w.dot(p1.coords()) * p1.coords());
}

ArcBaseline arc_family(const SpherePoint& p1, const SpherePoint& p2, double theta) {
  const Vec3& a = p1.coords();
  const Vec3& b = p2.coords();
  if (a.dot(b) <= -1.0 + kAntipodalTol || same_point(p1, p2)) {
    throw Error(ErrorCode::AntipodalOrIdentical, "arc family needs distinct, non-antipodal endpoints");
  }
  const Vec3 v1 = s2::seed_tangent(a);
  const Vec3 v2 = rodrigues_rotation(p2, theta) * s2::seed_tangent(b);
  Mat3 f1, f2;
  f1 << a, v1, a.cross(v1);
  f2 << b, v2, b.cross(v2);
  const Vec3 omega = s2::rotation_log(f2 * f1.transpose());
  if ((s2::rotation_exp(omega) * a - b).norm() > 1e-6) {
    throw Error(ErrorCode::FrameDegenerate, "arc generator does not reach the end point");
  }
  return ArcBaseline{detail::wrap_angle(theta), s2::skew(omega), p1, p2};
}

ArcBaseline connecting_arc(const SpherePoint& p1, const SpherePoint& p2, double theta) {
  return same_point(p1, p2) ? ArcBaseline::constant(p1) : arc_family(p1, p2, theta);
}

TangentCurve transport_along_arc(const TangentCurve& q, const ArcBaseline& arc) {
  return transform_curve(arc.transport(1.0), q);
}

TangentCurve transport_back_along_arc(const TangentCurve& q, const ArcBaseline& arc) {
  return transform_curve(arc.transport(1.0).transpose(), q);
}

double path_length(const TsrvcPair& a, const TsrvcPair& b, const ArcBaseline& arc) {
  require_same_size(a.size(), b.size());
  const double l = arc.speed();
  return std::sqrt(l * l + transported_distance_sq(arc.transport(1.0), a.q, b.q));
}

// Geodesic ----------------------------------------------------------------------

TsrvcPair BundleGeodesic::at(double s) const {
  const Mat3 p = baseline.transport(s);
  TangentCurve q(start.size());
  for (std::size_t k = 0; k < q.size(); ++k) q[k] = p * (start.q[k] + s * w[k]);
  const Vec3 point = baseline.point(s);
  for (auto& v : q) v = s2::project_tangent(point, v);
  return TsrvcPair(SpherePoint(point), std::move(q));
}

BundleGeodesic geodesic(const TsrvcPair& a, const TsrvcPair& b, const GeodesicOptions& options) {
  require_same_size(a.size(), b.size());
  if (a.start.coords().dot(b.start.coords()) <= -1.0 + kAntipodalTol) {
    throw Error(ErrorCode::AntipodalStartPoints, "start points are antipodal");
  }
  if (options.theta_grid < 1) throw Error(ErrorCode::InvalidArgument, "theta grid must be positive");

  if (same_point(a.start, b.start)) {
    TangentCurve w(a.size());
    for (std::size_t k = 0; k < w.size(); ++k) w[k] = s2::project_tangent(a.start.coords(), b.q[k]) - a.q[k];
    const double len = std::sqrt(l2_norm_sq(w));
    return BundleGeodesic{ArcBaseline::constant(a.start), a, std::move(w), len};
  }

  auto length = [&](double theta) { return path_length(a, b, arc_family(a.start, b.start, theta)); };

  const double step = kTwoPi / options.theta_grid;
  double best_theta = 0.0;
  double best = length(0.0);
  for (int i = 1; i < options.theta_grid; ++i) {
    const double theta = step * i;
    const double value = length(theta);
    if (value < best) {
      best = value;
      best_theta = theta;
    }
  }
  const auto [refined, value] =
      detail::golden_section(length, best_theta - step, best_theta + step, options.theta_tol);
  if (value < best) best_theta = refined;

  ArcBaseline arc = arc_family(a.start, b.start, best_theta);
  TangentCurve w = transport_back_along_arc(b.q, arc);
  for (std::size_t k = 0; k < w.size(); ++k) w[k] -= a.q[k];
  const double len = path_length(a, b, arc);
  return BundleGeodesic{std::move(arc), a, std::move(w), len};
}

// Tangent space -------------------------------------------------------------------

BundleTangent BundleTangent::zero(const SpherePoint& base, std::size_t size) {
  return BundleTangent{base, Vec3::Zero(), TangentCurve(size, Vec3::Zero())};
}

BundleTangent BundleTangent::scaled(double factor) const {
  BundleTangent out{base, u * factor, w};
  for (auto& v : out.w) v *= factor;
  return out;
}

double BundleTangent::norm() const { return std::sqrt(bundle_inner(*this, *this)); }

double bundle_inner(const BundleTangent& a, const BundleTangent& b) {
  if (!same_point(a.base, b.base)) throw Error(ErrorCode::MixedBasePoints, "tangents at different points");
  return a.u.dot(b.u) + l2_inner(a.w, b.w);
}

Vec3 solve_generator(const TsrvcPair& base, const BundleTangent& v) {
  const Vec3& p = base.start.coords();
  const double speed = v.u.norm();
  if (speed < 1e-12) return Vec3::Zero();

  // Second-derivative condition: the tangential acceleration of the baseline
  // balances the curvature term -int R(q1, w1) u dt.
  const auto weights = trapezoid_weights(base.size());
  Vec3 rhs = Vec3::Zero();
  for (std::size_t k = 0; k < base.size(); ++k) {
    const Vec3& q = base.q[k];
    const Vec3& w = v.w[k];
    rhs -= weights[k] * (w.dot(v.u) * q - q.dot(v.u) * w);
  }

  // Unknowns (c, a, b) of omega = c p + a e1 + b e2 in the frame e1 = u/|u|, e2 = p x e1.
  // omega x p = b e1 - a e2 must equal u; the tangential part of A^2 p, linearized
  // around that solution, is c (a e1 + b e2) = c |u| e2.
  const Vec3 e1 = v.u / speed;
  const Vec3 e2 = p.cross(e1);
  Eigen::Matrix<double, 4, 3> m;
  Eigen::Vector4d y;
  m << 0.0, 0.0, 1.0,
       0.0, -1.0, 0.0,
       0.0, 0.0, 0.0,
       speed, 0.0, 0.0;
  y << speed, 0.0, rhs.dot(e1), rhs.dot(e2);
  const Eigen::ColPivHouseholderQR<Eigen::Matrix<double, 4, 3>> qr(m);
  if (qr.rank() < 3) throw Error(ErrorCode::SingularSystem, "generator system is rank deficient");
  const Eigen::Vector3d x = qr.solve(y);
  return x(0) * p + x(1) * e1 + x(2) * e2;
}

TsrvcPair bundle_exp(const TsrvcPair& base, const BundleTangent& v, double s) {
  if (!same_point(base.start, v.base)) throw Error(ErrorCode::MixedBasePoints, "tangent is not at the base point");
  require_same_size(base.size(), v.w.size());
  const ArcBaseline arc = ArcBaseline::from_generator(base.start, solve_generator(base, v));
  return BundleGeodesic{arc, base, v.w, 0.0}.at(s);
}

BundleTangent log_along(const TsrvcPair& a, const TsrvcPair& b, const ArcBaseline& arc) {
  require_same_size(a.size(), b.size());
  const Mat3 back = arc.transport(1.0).transpose();
  const Vec3& p = a.start.coords();
  TangentCurve w(a.size());
  for (std::size_t k = 0; k < w.size(); ++k) w[k] = s2::project_tangent(p, back * b.q[k]) - a.q[k];
  return BundleTangent{a.start, arc.generator * p, std::move(w)};
}

BundleTangent bundle_log(const TsrvcPair& a, const TsrvcPair& b, const GeodesicOptions& options) {
  BundleGeodesic g = geodesic(a, b, options);
  return BundleTangent{a.start, g.baseline.generator * a.start.coords(), std::move(g.w)};
}

}  // namespace sphtraj
