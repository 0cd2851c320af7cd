#pragma once

#include <cstdint>
#include <vector>

#include "sphtraj/amplitude_stats.hpp"

namespace sphtraj {

using DistanceMatrix = std::vector<std::vector<double>>;

struct ClusterOptions {
  int max_iter = 20;
  /// Centroid updates; its alignment settings are also used for assignments.
  KarcherOptions karcher;
  unsigned threads = 0;
};

struct ClusterResult {
  std::vector<int> assignments;
  std::vector<TsrvcPair> centroids;
  /// (1/n) sum_i d_a(centroid of i, item i)^2.
  double asse = 0.0;
  int k = 0;
  int restarts_used = 1;
  int iterations = 0;
  /// d_a(centroid of i, item i).
  std::vector<double> distances;
  /// ASSE after each Lloyd iteration, for monotonicity checks.
  std::vector<double> asse_history;
};

/// Averaged binary co-assignment matrices.
struct CoAssignmentMatrix {
  std::vector<std::vector<double>> matrix;
};

/// Lloyd iterations under d_a with Karcher-mean centroids, started from k distinct
/// items drawn by seeded sampling without replacement. `members` optionally supplies
/// pairwise distances used while the centroids are still dataset items.
ClusterResult kmeans(const std::vector<TsrvcPair>& dataset, int k, std::uint64_t seed,
                     const ClusterOptions& options = {}, const DistanceMatrix* members = nullptr);

/// Lloyd iterations from explicit initial centroids.
ClusterResult kmeans_from(const std::vector<TsrvcPair>& dataset, std::vector<TsrvcPair> centroids,
                          const ClusterOptions& options = {});

struct ElbowPoint {
  int k;
  double asse;
};

/// Best ASSE over restarts for each k (ascending). Each k > previous also tries the
/// previous solution plus the worst-fit items as extra centroids, which keeps the
/// curve non-increasing.
std::vector<ElbowPoint> elbow_curve(const std::vector<TsrvcPair>& dataset, std::vector<int> k_values,
                                    int restarts, std::uint64_t seed, const ClusterOptions& options = {},
                                    const DistanceMatrix* members = nullptr);

/// k with the largest relative drop (ASSE[k-1] - ASSE[k]) / ASSE[k-1] along the curve.
int elbow_choice(const std::vector<ElbowPoint>& curve);

struct ConsensusResult {
  ClusterResult clusters;
  CoAssignmentMatrix co_assignment;
};

/// Vote-based k-means: averages co-assignments of `runs` seeded runs, links pairs
/// co-assigned in more than half of them, and reconciles the components to k clusters.
ConsensusResult consensus(const std::vector<TsrvcPair>& dataset, int k, int runs, std::uint64_t seed,
                          const ClusterOptions& options = {}, const DistanceMatrix* members = nullptr);

/// Adjusted Rand index between two labelings of the same items.
double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b);

/// Seed of the r-th run derived from a base seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t run);

}  // namespace sphtraj
