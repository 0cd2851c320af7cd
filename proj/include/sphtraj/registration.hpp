#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "sphtraj/bundle.hpp"

namespace sphtraj {

/// Result of the joint (theta, gamma) search that aligns b to a.
struct AlignmentResult {
  /// Amplitude distance d_a = sqrt(l_beta^2 + min_gamma ||P q1 - (q2, gamma)||^2).
  double distance = 0.0;
  /// Optimal warp applied to b: the relative phase of a with respect to b.
  Warp warp = Warp::identity(2);
  double theta = 0.0;
  /// (p2, q2 * gamma).
  TsrvcPair aligned;
};

using AlignmentOptions = GeodesicOptions;

/// Result of the lattice search over warps.
struct DpResult {
  Warp warp;
  double cost;
};

/// Minimizes int |qref - (qmov o gamma) sqrt(gamma')|^2 dt over piecewise-linear
/// warps on the T x T lattice with local slopes in {1/3, 1/2, 1, 2, 3}.
///
/// The cost of a lattice path is evaluated exactly as warp_curve() would
/// evaluate the sampled warp (central-difference rate, linear interpolation of
/// qmov, trapezoid weights), so the returned cost equals
/// l2_distance_sq(qref, warp_curve(qmov, warp)) up to rounding.
DpResult dp_warp(const TangentCurve& qref, const TangentCurve& qmov);

/// Local lattice steps (di, dj) allowed between consecutive warp nodes.
inline constexpr std::pair<int, int> kLatticeSteps[] = {{1, 1}, {1, 2}, {2, 1}, {1, 3}, {3, 1}};

/// Samples the piecewise-linear warp through lattice nodes (i, j) -> gamma(t_i) = t_j.
/// The node list must start at (0, 0), end at (T-1, T-1) and use kLatticeSteps.
Warp warp_from_lattice_path(const std::vector<std::pair<int, int>>& nodes, std::size_t size);

/// Sub-cell refinement of a lattice warp. A second DP moves one sample at a time,
/// places gamma(t_i) on a grid `subdivisions` times finer than the samples, and
/// searches only within `band` cells of `coarse`. Local slopes stay in [1/3, 3] and
/// the cost is evaluated like warp_curve(). With subdivisions a multiple of 6 every
/// lattice warp is representable, so the result is never worse than `coarse`.
DpResult refine_warp(const TangentCurve& qref, const TangentCurve& qmov, const Warp& coarse, int subdivisions = 6,
                     int band = 3);

/// Minimizes over (theta, gamma): a sweep of the baseline angle with dp_warp per angle,
/// golden refinement of theta, then refine_warp at the chosen angle.
AlignmentResult amplitude_distance(const TsrvcPair& a, const TsrvcPair& b, const AlignmentOptions& options = {});

/// Symmetrized amplitude distances (d_a(i,j) + d_a(j,i)) / 2 with a zero diagonal.
/// Work is spread over `threads` workers (0 = hardware concurrency); the result
/// does not depend on the thread count.
std::vector<std::vector<double>> pairwise_distance_matrix(const std::vector<TsrvcPair>& dataset,
                                                          const AlignmentOptions& options = {},
                                                          unsigned threads = 0);

/// Runs body(i) for i in [0, count) on a small thread pool. The first exception
/// thrown by any task is rethrown after all workers join.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body, unsigned threads = 0);

}  // namespace sphtraj
