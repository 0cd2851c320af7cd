#include "sphtraj/sphere_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sphtraj {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidPoint: return "InvalidPoint";
    case ErrorCode::NotTangent: return "NotTangent";
    case ErrorCode::InvalidRotation: return "InvalidRotation";
    case ErrorCode::AntipodalPoints: return "AntipodalPoints";
    case ErrorCode::AntipodalOrIdentical: return "AntipodalOrIdentical";
    case ErrorCode::MixedBasePoints: return "MixedBasePoints";
    case ErrorCode::FrameDegenerate: return "FrameDegenerate";
    case ErrorCode::DegenerateTrajectory: return "DegenerateTrajectory";
    case ErrorCode::InvalidWarp: return "InvalidWarp";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::AntipodalStartPoints: return "AntipodalStartPoints";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::DegenerateMean: return "DegenerateMean";
    case ErrorCode::RankTooLarge: return "RankTooLarge";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::InvalidK: return "InvalidK";
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::MalformedDataLine: return "MalformedDataLine";
    case ErrorCode::MalformedInput: return "MalformedInput";
    case ErrorCode::UnsupportedCombination: return "UnsupportedCombination";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

namespace {

std::string describe(const Vec3& v) {
  std::ostringstream os;
  os.precision(17);
  os << "(" << v.x() << ", " << v.y() << ", " << v.z() << ")";
  return os.str();
}

}  // namespace

SpherePoint::SpherePoint(const Vec3& coords) {
  const double n = coords.norm();
  if (!std::isfinite(n) || std::abs(n - 1.0) > kRenormalizeTol) {
    throw Error(ErrorCode::InvalidPoint, "norm " + std::to_string(n) + " of " + describe(coords));
  }
  coords_ = coords / n;
}

TangentVector::TangentVector(const SpherePoint& base, const Vec3& vec) : base_(base) {
  if (!vec.allFinite()) throw Error(ErrorCode::NotTangent, "non-finite vector");
  const double radial = vec.dot(base.coords());
  if (std::abs(radial) > kTangencyTol) {
    throw Error(ErrorCode::NotTangent, "radial component " + std::to_string(radial));
  }
  vec_ = vec - radial * base.coords();
}

Rotation3::Rotation3(const Mat3& matrix) : matrix_(matrix) {
  const double orth = (matrix.transpose() * matrix - Mat3::Identity()).cwiseAbs().maxCoeff();
  const double det = matrix.determinant();
  if (!(orth <= 1e-9) || std::abs(det - 1.0) > 1e-9) {
    throw Error(ErrorCode::InvalidRotation,
                "orthogonality defect " + std::to_string(orth) + ", det " + std::to_string(det));
  }
}

SpherePoint geodesic_point(const SpherePoint& p, const SpherePoint& q, double t) {
  const double c = p.coords().dot(q.coords());
  if (std::abs(c) >= 1.0 - kAntipodalTol) {
    throw Error(ErrorCode::AntipodalOrIdentical, "geodesic undefined for <p,q> = " + std::to_string(c));
  }
  const double theta = std::acos(c);
  const double s = std::sin(theta);
  return SpherePoint((std::sin(theta * (1.0 - t)) * p.coords() + std::sin(theta * t) * q.coords()) / s);
}

TangentVector parallel_transport(const TangentVector& v, const SpherePoint& q) {
  const Vec3& p = v.base().coords();
  if (p.dot(q.coords()) <= -1.0 + kAntipodalTol) {
    throw Error(ErrorCode::AntipodalPoints, "transport between antipodes");
  }
  const Vec3 sum = p + q.coords();
  return TangentVector(q, v.vec() - 2.0 * v.vec().dot(q.coords()) * sum / sum.squaredNorm());
}

SpherePoint exp_map(const TangentVector& v) {
  const double n = v.norm();
  if (n < 1e-12) return v.base();
  return SpherePoint(std::cos(n) * v.base().coords() + std::sin(n) * v.vec() / n);
}

TangentVector log_map(const SpherePoint& p, const SpherePoint& q) {
  if (p.coords().dot(q.coords()) <= -1.0 + kAntipodalTol) {
    throw Error(ErrorCode::AntipodalPoints, "log of antipodal point");
  }
  return TangentVector(p, s2::log(p.coords(), q.coords()));
}

double geodesic_distance(const SpherePoint& p, const SpherePoint& q) {
  return s2::distance(p.coords(), q.coords());
}

TangentVector curvature_tensor(const TangentVector& x, const TangentVector& y, const TangentVector& z) {
  if (!(x.base() == y.base()) || !(x.base() == z.base())) {
    throw Error(ErrorCode::MixedBasePoints, "curvature arguments at different base points");
  }
  return TangentVector(x.base(), y.vec().dot(z.vec()) * x.vec() - x.vec().dot(z.vec()) * y.vec());
}

Rotation3 rodrigues_rotation(const SpherePoint& axis, double theta) {
  const Vec3& a = axis.coords();
  const Mat3 m = Mat3::Identity() * std::cos(theta) + std::sin(theta) * s2::skew(a) +
                 (1.0 - std::cos(theta)) * a * a.transpose();
  return Rotation3(m);
}

namespace s2 {

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

Vec3 vee(const Mat3& m) {
  return Vec3(m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1)) * 0.5;
}

Vec3 project_tangent(const Vec3& p, const Vec3& v) { return v - v.dot(p) * p; }

Mat3 transport_matrix(const Vec3& p, const Vec3& q) {
  const Vec3 sum = p + q;
  return Mat3::Identity() - (2.0 / sum.squaredNorm()) * sum * q.transpose();
}

Vec3 exp(const Vec3& p, const Vec3& v) {
  const double n = v.norm();
  if (n < 1e-12) return p;
  return (std::cos(n) * p + std::sin(n) * (v / n)).normalized();
}

Vec3 log(const Vec3& p, const Vec3& q) {
  const Vec3 w = q - p.dot(q) * p;
  const double s = w.norm();
  if (s < 1e-300) return Vec3::Zero();
  const double theta = std::atan2(s, p.dot(q));
  return w * (theta / s);
}

double distance(const Vec3& p, const Vec3& q) { return std::atan2(p.cross(q).norm(), p.dot(q)); }

Vec3 slerp(const Vec3& p, const Vec3& q, double t) {
  const double theta = distance(p, q);
  if (theta < 1e-9) return ((1.0 - t) * p + t * q).normalized();
  const double s = std::sin(theta);
  return ((std::sin(theta * (1.0 - t)) * p + std::sin(theta * t) * q) / s).normalized();
}

Mat3 rotation_exp(const Vec3& omega) {
  const double angle = omega.norm();
  if (angle < 1e-300) return Mat3::Identity();
  return Eigen::AngleAxisd(angle, omega / angle).toRotationMatrix();
}

Vec3 rotation_log(const Mat3& rotation) {
  const Eigen::AngleAxisd aa(rotation);
  return aa.axis() * aa.angle();
}

Vec3 seed_tangent(const Vec3& p) {
  Vec3 v = Vec3::UnitZ().cross(p);
  if (v.norm() < 1e-6) v = Vec3::UnitX().cross(p);
  return v.normalized();
}

}  // namespace s2

}  // namespace sphtraj
