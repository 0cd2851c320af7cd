#pragma once

#include <cstddef>
#include <vector>

#include "sphtraj/sphere_geometry.hpp"

namespace sphtraj {

/// Default number of grid samples used by every pipeline operation.
inline constexpr std::size_t kDefaultGridSize = 100;

// Sampling grid
//
// All curves are sampled on t_k = k / (T - 1), k = 0..T-1, so both ends of
// [0, 1] are grid points. Integrals over t use the trapezoid rule on this grid.

inline double grid_step(std::size_t size) { return 1.0 / static_cast<double>(size - 1); }

std::vector<double> trapezoid_weights(std::size_t size);

/// A sampled curve in a single tangent plane (the base point is kept by the owner).
using TangentCurve = std::vector<Vec3>;

double l2_inner(const TangentCurve& a, const TangentCurve& b);
double l2_norm_sq(const TangentCurve& a);
double l2_distance_sq(const TangentCurve& a, const TangentCurve& b);

/// Linear interpolation of a tangent curve at t in [0, 1].
Vec3 interpolate_curve(const TangentCurve& curve, double t);

/// A path on the sphere sampled on the uniform grid.
class Trajectory {
 public:
  /// Throws DegenerateTrajectory for fewer than two samples or antipodal neighbours.
  explicit Trajectory(std::vector<SpherePoint> samples);

  static Trajectory from_coords(const std::vector<Vec3>& coords);
  static Trajectory constant(const SpherePoint& p, std::size_t size);

  std::size_t size() const noexcept { return samples_.size(); }
  const SpherePoint& operator[](std::size_t k) const { return samples_[k]; }
  const std::vector<SpherePoint>& samples() const noexcept { return samples_; }
  const SpherePoint& front() const { return samples_.front(); }
  const SpherePoint& back() const { return samples_.back(); }

  /// Geodesic interpolation at t in [0, 1].
  SpherePoint at(double t) const;

 private:
  std::vector<SpherePoint> samples_;
};

/// Starting point plus transported square-root velocity curve.
struct TsrvcPair {
  TsrvcPair(const SpherePoint& start, TangentCurve q);

  std::size_t size() const noexcept { return q.size(); }

  SpherePoint start;
  TangentCurve q;
};

/// Non-decreasing reparameterization of [0, 1], sampled on the uniform grid.
class Warp {
 public:
  /// Endpoints within 1e-9 of 0 and 1 are snapped exactly; throws InvalidWarp otherwise
  /// or when the values decrease by more than 1e-12.
  explicit Warp(std::vector<double> values);

  static Warp identity(std::size_t size);

  std::size_t size() const noexcept { return values_.size(); }
  const std::vector<double>& values() const noexcept { return values_; }
  double operator[](std::size_t k) const { return values_[k]; }

  /// Piecewise-linear evaluation at t in [0, 1].
  double operator()(double t) const;

  /// Central differences (one-sided at the ends), clamped below at 0.
  std::vector<double> derivative() const;

  /// Numerical inverse on the same grid.
  Warp inverse() const;

  /// (this o inner)(t) = this(inner(t)).
  Warp compose(const Warp& inner) const;

  /// Max |gamma_k - other_k|.
  double linf_distance(const Warp& other) const;

 private:
  std::vector<double> values_;
};

/// TSRVC of a sampled trajectory: forward-difference velocity scaled by
/// 1/sqrt(|v|) and transported back to the start through the sample sequence.
TsrvcPair tsrvc_of(const Trajectory& alpha);

/// Covariant integration of (p, q) back to a trajectory on the same grid.
Trajectory integrate(const TsrvcPair& pair);

/// alpha o gamma by geodesic interpolation of alpha.
Trajectory warp_trajectory(const Trajectory& alpha, const Warp& gamma);

/// (p, (q o gamma) sqrt(gamma')).
TsrvcPair warp_tsrvc(const TsrvcPair& pair, const Warp& gamma);
TangentCurve warp_curve(const TangentCurve& q, const Warp& gamma);

/// Uniform resampling by piecewise great-circle interpolation.
Trajectory resample(const Trajectory& alpha, std::size_t new_size);

}  // namespace sphtraj
