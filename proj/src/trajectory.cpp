#include "sphtraj/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sphtraj {

namespace {

void require_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw Error(ErrorCode::GridMismatch,
                std::string(what) + ": " + std::to_string(a) + " vs " + std::to_string(b) + " samples");
  }
}

// Splits a continuous grid position x in [0, size-1] into a segment index and fraction.
std::pair<std::size_t, double> locate(double x, std::size_t size) {
  const double last = static_cast<double>(size - 1);
  x = std::clamp(x, 0.0, last);
  auto j = static_cast<std::size_t>(std::floor(x));
  if (j >= size - 1) j = size - 2;
  return {j, x - static_cast<double>(j)};
}

Vec3 point_at_position(const std::vector<SpherePoint>& samples, double x) {
  const auto [j, f] = locate(x, samples.size());
  if (f == 0.0) return samples[j].coords();
  if (f == 1.0) return samples[j + 1].coords();
  return s2::slerp(samples[j].coords(), samples[j + 1].coords(), f);
}

}  // namespace

std::vector<double> trapezoid_weights(std::size_t size) {
  const double delta = grid_step(size);
  std::vector<double> w(size, delta);
  w.front() = w.back() = 0.5 * delta;
  return w;
}

double l2_inner(const TangentCurve& a, const TangentCurve& b) {
  require_same_size(a.size(), b.size(), "l2_inner");
  const double delta = grid_step(a.size());
  double sum = 0.5 * (a.front().dot(b.front()) + a.back().dot(b.back()));
  for (std::size_t k = 1; k + 1 < a.size(); ++k) sum += a[k].dot(b[k]);
  return sum * delta;
}

double l2_norm_sq(const TangentCurve& a) { return l2_inner(a, a); }

double l2_distance_sq(const TangentCurve& a, const TangentCurve& b) {
  require_same_size(a.size(), b.size(), "l2_distance");
  const double delta = grid_step(a.size());
  double sum = 0.5 * ((a.front() - b.front()).squaredNorm() + (a.back() - b.back()).squaredNorm());
  for (std::size_t k = 1; k + 1 < a.size(); ++k) sum += (a[k] - b[k]).squaredNorm();
  return sum * delta;
}

Vec3 interpolate_curve(const TangentCurve& curve, double t) {
  const auto [j, f] = locate(t * static_cast<double>(curve.size() - 1), curve.size());
  if (f == 0.0) return curve[j];
  return (1.0 - f) * curve[j] + f * curve[j + 1];
}

// Trajectory ------------------------------------------------------------------

Trajectory::Trajectory(std::vector<SpherePoint> samples) : samples_(std::move(samples)) {
  if (samples_.size() < 2) {
    throw Error(ErrorCode::DegenerateTrajectory, "need at least two samples");
  }
  for (std::size_t k = 0; k + 1 < samples_.size(); ++k) {
    if (samples_[k].coords().dot(samples_[k + 1].coords()) <= -1.0 + kAntipodalTol) {
      throw Error(ErrorCode::DegenerateTrajectory, "antipodal samples at index " + std::to_string(k));
    }
  }
}

Trajectory Trajectory::from_coords(const std::vector<Vec3>& coords) {
  std::vector<SpherePoint> pts;
  pts.reserve(coords.size());
  for (const auto& c : coords) pts.emplace_back(c);
  return Trajectory(std::move(pts));
}

Trajectory Trajectory::constant(const SpherePoint& p, std::size_t size) {
  return Trajectory(std::vector<SpherePoint>(size, p));
}

SpherePoint Trajectory::at(double t) const {
  return SpherePoint(point_at_position(samples_, t * static_cast<double>(size() - 1)));
}

// TsrvcPair -------------------------------------------------------------------

TsrvcPair::TsrvcPair(const SpherePoint& start_point, TangentCurve curve)
    : start(start_point), q(std::move(curve)) {
  const Vec3& p = start.coords();
  for (auto& v : q) {
    const double radial = v.dot(p);
    if (!v.allFinite() || std::abs(radial) > kTangencyTol * std::max(1.0, v.norm())) {
      throw Error(ErrorCode::NotTangent, "TSRVC sample not tangent at the start point");
    }
    v -= radial * p;
  }
}

// Warp ------------------------------------------------------------------------

Warp::Warp(std::vector<double> values) : values_(std::move(values)) {
  if (values_.size() < 2) throw Error(ErrorCode::InvalidWarp, "need at least two samples");
  if (std::abs(values_.front()) > 1e-9 || std::abs(values_.back() - 1.0) > 1e-9) {
    throw Error(ErrorCode::InvalidWarp, "endpoints must be 0 and 1");
  }
  values_.front() = 0.0;
  values_.back() = 1.0;
  for (std::size_t k = 1; k < values_.size(); ++k) {
    if (!std::isfinite(values_[k]) || values_[k] < values_[k - 1] - 1e-12) {
      throw Error(ErrorCode::InvalidWarp, "decreasing at index " + std::to_string(k));
    }
    values_[k] = std::clamp(std::max(values_[k], values_[k - 1]), 0.0, 1.0);
  }
}

Warp Warp::identity(std::size_t size) {
  std::vector<double> v(size);
  for (std::size_t k = 0; k < size; ++k) v[k] = static_cast<double>(k) / static_cast<double>(size - 1);
  return Warp(std::move(v));
}

double Warp::operator()(double t) const {
  const auto [j, f] = locate(t * static_cast<double>(size() - 1), size());
  return (1.0 - f) * values_[j] + f * values_[j + 1];
}

std::vector<double> Warp::derivative() const {
  const std::size_t n = size();
  const double delta = grid_step(n);
  std::vector<double> d(n);
  d.front() = (values_[1] - values_[0]) / delta;
  d.back() = (values_[n - 1] - values_[n - 2]) / delta;
  for (std::size_t k = 1; k + 1 < n; ++k) d[k] = (values_[k + 1] - values_[k - 1]) / (2.0 * delta);
  for (auto& x : d) x = std::max(x, 0.0);
  return d;
}

Warp Warp::inverse() const {
  const std::size_t n = size();
  std::vector<double> inv(n);
  std::size_t j = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double target = static_cast<double>(k) / static_cast<double>(n - 1);
    while (j + 1 < n - 1 && values_[j + 1] < target) ++j;
    const double lo = values_[j], hi = values_[j + 1];
    const double f = hi > lo ? std::clamp((target - lo) / (hi - lo), 0.0, 1.0) : 0.0;
    inv[k] = (static_cast<double>(j) + f) / static_cast<double>(n - 1);
  }
  inv.front() = 0.0;
  inv.back() = 1.0;
  return Warp(std::move(inv));
}

Warp Warp::compose(const Warp& inner) const {
  std::vector<double> v(inner.size());
  for (std::size_t k = 0; k < inner.size(); ++k) v[k] = (*this)(inner[k]);
  return Warp(std::move(v));
}

double Warp::linf_distance(const Warp& other) const {
  require_same_size(size(), other.size(), "warp distance");
  double m = 0.0;
  for (std::size_t k = 0; k < size(); ++k) m = std::max(m, std::abs(values_[k] - other.values_[k]));
  return m;
}

// TSRVC -----------------------------------------------------------------------

TsrvcPair tsrvc_of(const Trajectory& alpha) {
  const std::size_t n = alpha.size();
  const double delta = grid_step(n);
  const Vec3& p = alpha.front().coords();

  TangentCurve q(n);
  Mat3 back = Mat3::Identity();  // T_{alpha(k)} -> T_{alpha(0)}
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const Vec3& a = alpha[k].coords();
    const Vec3& b = alpha[k + 1].coords();
    if (a.dot(b) <= -1.0 + kAntipodalTol) {
      throw Error(ErrorCode::DegenerateTrajectory, "antipodal samples at index " + std::to_string(k));
    }
    if (k > 0) back = back * s2::transport_matrix(a, alpha[k - 1].coords());
    const Vec3 velocity = s2::log(a, b) / delta;
    const double speed = velocity.norm();
    q[k] = speed < 1e-10 ? Vec3(Vec3::Zero()) : Vec3(s2::project_tangent(p, back * (velocity / std::sqrt(speed))));
  }
  q[n - 1] = q[n - 2];
  return TsrvcPair(alpha.front(), std::move(q));
}

Trajectory integrate(const TsrvcPair& pair) {
  const std::size_t n = pair.size();
  const double delta = grid_step(n);
  std::vector<Vec3> pts(n);
  pts[0] = pair.start.coords();
  Mat3 forward = Mat3::Identity();  // T_{alpha(0)} -> T_{alpha(k)}
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const Vec3 moved = s2::project_tangent(pts[k], forward * pair.q[k]);
    pts[k + 1] = s2::exp(pts[k], delta * moved.norm() * moved);
    forward = s2::transport_matrix(pts[k], pts[k + 1]) * forward;
  }
  return Trajectory::from_coords(pts);
}

Trajectory warp_trajectory(const Trajectory& alpha, const Warp& gamma) {
  require_same_size(alpha.size(), gamma.size(), "warp_trajectory");
  const double last = static_cast<double>(alpha.size() - 1);
  std::vector<SpherePoint> out;
  out.reserve(alpha.size());
  for (std::size_t k = 0; k < gamma.size(); ++k) {
    out.emplace_back(point_at_position(alpha.samples(), gamma[k] * last));
  }
  return Trajectory(std::move(out));
}

TangentCurve warp_curve(const TangentCurve& q, const Warp& gamma) {
  require_same_size(q.size(), gamma.size(), "warp_tsrvc");
  const auto rate = gamma.derivative();
  TangentCurve out(q.size());
  for (std::size_t k = 0; k < q.size(); ++k) out[k] = interpolate_curve(q, gamma[k]) * std::sqrt(rate[k]);
  return out;
}

TsrvcPair warp_tsrvc(const TsrvcPair& pair, const Warp& gamma) {
  return TsrvcPair(pair.start, warp_curve(pair.q, gamma));
}

Trajectory resample(const Trajectory& alpha, std::size_t new_size) {
  if (new_size < 2) throw Error(ErrorCode::InvalidArgument, "resample needs at least two samples");
  const std::size_t src_last = alpha.size() - 1;
  const double dst_last = static_cast<double>(new_size - 1);
  std::vector<SpherePoint> out;
  out.reserve(new_size);
  for (std::size_t k = 0; k < new_size; ++k) {
    const double x = static_cast<double>(k * src_last) / dst_last;
    out.emplace_back(point_at_position(alpha.samples(), x));
  }
  return Trajectory(std::move(out));
}

}  // namespace sphtraj
