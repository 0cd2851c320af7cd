#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>

#include "sphtraj/clustering.hpp"
#include "sphtraj/data_io.hpp"
#include "test_support.hpp"

using namespace sphtraj;
using namespace sphtraj::testing;

namespace {

// Three groups of noisy, warped members with distinct base paths.
struct Groups {
  std::vector<TsrvcPair> items;
  std::vector<int> truth;
};

Groups three_groups(std::size_t per_group, std::size_t grid, std::uint64_t seed) {
  Groups out;
  for (int g = 0; g < 3; ++g) {
    SyntheticSpec spec;
    spec.count = per_group;
    spec.grid = grid;
    spec.noise = 0.03;
    spec.warp_strength = 0.5;
    spec.start_lon += 20.0 * g;
    spec.end_lon += 20.0 * g;
    if (g == 1) spec.bump_height = -spec.bump_height;
    spec.seed = derive_seed(seed, static_cast<std::uint64_t>(g));
    for (const auto& t : generate_synthetic(spec)) {
      out.items.push_back(tsrvc_of(t));
      out.truth.push_back(g);
    }
  }
  return out;
}

ClusterOptions fast_options() {
  ClusterOptions options;
  options.karcher.alignment.theta_grid = 24;
  options.karcher.max_iter = 10;
  return options;
}

class ThreeGroups : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    groups_ = new Groups(three_groups(4, 30, 5));
    matrix_ = new DistanceMatrix(pairwise_distance_matrix(groups_->items, fast_options().karcher.alignment));
  }
  static void TearDownTestSuite() {
    delete groups_;
    delete matrix_;
  }
  static Groups* groups_;
  static DistanceMatrix* matrix_;
};

Groups* ThreeGroups::groups_ = nullptr;
DistanceMatrix* ThreeGroups::matrix_ = nullptr;

TEST_F(ThreeGroups, BestRestartRecoversTheGroups) {
  // A single run can stall with two seeds in one group; the lowest ASSE over a few
  // restarts cannot.
  std::optional<ClusterResult> best;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    ClusterResult run = kmeans(groups_->items, 3, seed, fast_options(), matrix_);
    if (!best || run.asse < best->asse) best = std::move(run);
  }
  const ClusterResult& r = *best;
  EXPECT_EQ(r.k, 3);
  ASSERT_EQ(r.assignments.size(), groups_->items.size());
  for (int a : r.assignments) {
    EXPECT_GE(a, 0);
    EXPECT_LT(a, 3);
  }
  EXPECT_EQ(r.centroids.size(), 3u);
  EXPECT_DOUBLE_EQ(adjusted_rand_index(r.assignments, groups_->truth), 1.0);
}

TEST_F(ThreeGroups, LloydAsseIsNonIncreasing) {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const ClusterResult r = kmeans(groups_->items, 3, seed, fast_options(), matrix_);
    ASSERT_FALSE(r.asse_history.empty());
    // Centroids are approximate Karcher means, hence the small slack.
    for (std::size_t t = 1; t < r.asse_history.size(); ++t) {
      EXPECT_LE(r.asse_history[t], r.asse_history[t - 1] + 1e-3);
    }
    double sum = 0.0;
    for (double d : r.distances) sum += d * d;
    EXPECT_NEAR(r.asse, sum / r.distances.size(), 1e-12);
  }
}

TEST_F(ThreeGroups, PartitionDoesNotDependOnItemOrder) {
  const std::size_t n = groups_->items.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::reverse(order.begin(), order.end());
  std::rotate(order.begin(), order.begin() + 5, order.end());
  std::vector<TsrvcPair> permuted;
  for (auto i : order) permuted.push_back(groups_->items[i]);

  // Start both runs from the same three items so only the order differs.
  const std::vector<TsrvcPair> seeds{groups_->items[0], groups_->items[4], groups_->items[8]};
  const ClusterResult a = kmeans_from(groups_->items, seeds, fast_options());
  const ClusterResult b = kmeans_from(permuted, seeds, fast_options());
  std::vector<int> back(n);
  for (std::size_t m = 0; m < n; ++m) back[order[m]] = b.assignments[m];
  EXPECT_EQ(a.assignments, back);
  EXPECT_NEAR(a.asse, b.asse, 1e-9);
}

TEST_F(ThreeGroups, SingleRunConsensusIsThatRunsCoAssignment) {
  const ConsensusResult c = consensus(groups_->items, 3, 1, 9, fast_options(), matrix_);
  const ClusterResult run = kmeans(groups_->items, 3, derive_seed(9, 0), fast_options(), matrix_);
  const std::size_t n = groups_->items.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      EXPECT_EQ(c.co_assignment.matrix[i][j], run.assignments[i] == run.assignments[j] ? 1.0 : 0.0);
    }
  }
  EXPECT_DOUBLE_EQ(adjusted_rand_index(c.clusters.assignments, run.assignments), 1.0);
}

TEST_F(ThreeGroups, ConsensusOverRestartsRecoversTheGroups) {
  const ConsensusResult c = consensus(groups_->items, 3, 5, 3, fast_options(), matrix_);
  EXPECT_DOUBLE_EQ(adjusted_rand_index(c.clusters.assignments, groups_->truth), 1.0);
  const auto& m = c.co_assignment.matrix;
  for (std::size_t i = 0; i < m.size(); ++i) {
    EXPECT_EQ(m[i][i], 1.0);
    for (std::size_t j = 0; j < m.size(); ++j) {
      EXPECT_EQ(m[i][j], m[j][i]);
      EXPECT_GE(m[i][j], 0.0);
      EXPECT_LE(m[i][j], 1.0);
    }
  }
  EXPECT_EQ(c.clusters.centroids.size(), 3u);
}

TEST_F(ThreeGroups, ConsensusReconcilesToTheRequestedK) {
  for (int k : {2, 4}) {
    const ConsensusResult c = consensus(groups_->items, k, 3, 4, fast_options(), matrix_);
    std::map<int, int> sizes;
    for (int a : c.clusters.assignments) ++sizes[a];
    EXPECT_EQ(static_cast<int>(sizes.size()), k);
  }
}

TEST_F(ThreeGroups, ElbowCurveIsMonotoneWithElbowAtThree) {
  const auto curve = elbow_curve(groups_->items, {4, 1, 2, 3, 5}, 2, 7, fast_options(), matrix_);
  ASSERT_EQ(curve.size(), 5u);
  for (std::size_t t = 0; t < curve.size(); ++t) EXPECT_EQ(curve[t].k, static_cast<int>(t) + 1);
  for (std::size_t t = 1; t < curve.size(); ++t) EXPECT_LE(curve[t].asse, curve[t - 1].asse);
  EXPECT_EQ(elbow_choice(curve), 3);
}

TEST(Clustering, InvalidKThrows) {
  Rng rng(1);
  std::vector<TsrvcPair> items;
  for (int i = 0; i < 3; ++i) items.push_back(tsrvc_of(random_path(rng).sample(12)));
  for (int k : {0, 4}) {
    try {
      kmeans(items, k, 1);
      FAIL() << "k = " << k;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::InvalidK);
    }
  }
  EXPECT_THROW(consensus(items, 5, 2, 1), Error);
  EXPECT_THROW(elbow_curve(items, {1, 9}, 1, 1), Error);
}

TEST(Clustering, OneClusterCentroidIsTheKarcherMean) {
  Rng rng(2);
  std::vector<TsrvcPair> items;
  for (int i = 0; i < 3; ++i) items.push_back(tsrvc_of(random_path(rng).sample(16)));
  const ClusterResult r = kmeans(items, 1, 4, fast_options());
  for (int a : r.assignments) EXPECT_EQ(a, 0);
  EXPECT_EQ(r.centroids.size(), 1u);
}

// Pair-counting oracle: ARI from the four pair categories.
double ari_by_pairs(const std::vector<int>& a, const std::vector<int>& b) {
  double both = 0, only_a = 0, only_b = 0, neither = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      const bool sa = a[i] == a[j], sb = b[i] == b[j];
      (sa && sb ? both : sa ? only_a : sb ? only_b : neither) += 1.0;
    }
  }
  const double n = both + only_a + only_b + neither;
  const double expected = (both + only_a) * (both + only_b) / n;
  const double max = 0.5 * ((both + only_a) + (both + only_b));
  return (both - expected) / (max - expected);
}

TEST(AdjustedRand, MatchesPairCountingAndKnownValue) {
  // Reference value 0.24242424... for this pair of labelings.
  EXPECT_NEAR(adjusted_rand_index({0, 0, 0, 1, 1, 1}, {0, 0, 1, 1, 2, 2}), 8.0 / 33.0, 1e-12);
  Rng rng(3);
  std::uniform_int_distribution<int> label(0, 3);
  for (int t = 0; t < 50; ++t) {
    std::vector<int> a(20), b(20);
    for (auto& x : a) x = label(rng);
    for (auto& x : b) x = label(rng);
    EXPECT_NEAR(adjusted_rand_index(a, b), ari_by_pairs(a, b), 1e-12);
    EXPECT_NEAR(adjusted_rand_index(a, b), adjusted_rand_index(b, a), 1e-12);
  }
}

TEST(AdjustedRand, InvariantUnderRelabeling) {
  const std::vector<int> a{0, 0, 1, 1, 2, 2, 2}, relabeled{5, 5, 3, 3, 9, 9, 9};
  EXPECT_DOUBLE_EQ(adjusted_rand_index(a, relabeled), 1.0);
  EXPECT_DOUBLE_EQ(adjusted_rand_index({0, 0, 0}, {1, 1, 1}), 1.0);
  EXPECT_THROW(adjusted_rand_index({0, 1}, {0}), Error);
}

TEST(Elbow, ChoosesLargestRelativeDrop) {
  EXPECT_EQ(elbow_choice({{1, 10.0}, {2, 6.0}, {3, 1.0}, {4, 0.9}}), 3);
  EXPECT_EQ(elbow_choice({{2, 4.0}, {3, 1.0}, {4, 0.5}}), 3);
  EXPECT_THROW(elbow_choice({{1, 1.0}}), Error);
}

TEST(Seeds, DerivedSeedsAreStableAndDistinct) {
  EXPECT_EQ(derive_seed(42, 3), derive_seed(42, 3));
  std::vector<std::uint64_t> seen;
  for (std::uint64_t r = 0; r < 100; ++r) seen.push_back(derive_seed(42, r));
  std::sort(seen.begin(), seen.end());
  EXPECT_EQ(std::unique(seen.begin(), seen.end()), seen.end());
}

}  // namespace
