#include "sphtraj/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <string>

namespace sphtraj {

namespace {

using Matrix = std::vector<std::vector<double>>;

void require_k(int k, std::size_t n) {
  if (k < 1 || static_cast<std::size_t>(k) > n) {
    throw Error(ErrorCode::InvalidK, "k = " + std::to_string(k) + " with " + std::to_string(n) + " items");
  }
}

// d[i][j] = d_a(centroid j, item i) for the requested columns.
void fill_columns(Matrix& d, const std::vector<TsrvcPair>& dataset, const std::vector<TsrvcPair>& centroids,
                  const std::vector<std::pair<std::size_t, std::size_t>>& cells, const ClusterOptions& options) {
  parallel_for(
      cells.size(),
      [&](std::size_t t) {
        const auto [i, j] = cells[t];
        d[i][j] = amplitude_distance(centroids[j], dataset[i], options.karcher.alignment).distance;
      },
      options.threads);
}

Matrix fresh_distances(const std::vector<TsrvcPair>& dataset, const std::vector<TsrvcPair>& centroids,
                       const ClusterOptions& options) {
  Matrix d(dataset.size(), std::vector<double>(centroids.size(), 0.0));
  std::vector<std::pair<std::size_t, std::size_t>> cells;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    for (std::size_t j = 0; j < centroids.size(); ++j) cells.emplace_back(i, j);
  }
  fill_columns(d, dataset, centroids, cells, options);
  return d;
}

std::vector<int> nearest(const Matrix& d) {
  std::vector<int> out(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    out[i] = static_cast<int>(std::min_element(d[i].begin(), d[i].end()) - d[i].begin());
  }
  return out;
}

double asse_of(const Matrix& d, const std::vector<int>& assign) {
  double sum = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) sum += d[i][assign[i]] * d[i][assign[i]];
  return sum / static_cast<double>(d.size());
}

// Gives every empty cluster the item farthest from its centroid (among items whose
// cluster keeps at least one other member).
void reseed_empty(const std::vector<TsrvcPair>& dataset, std::vector<TsrvcPair>& centroids, Matrix& d,
                  std::vector<int>& assign, const ClusterOptions& options) {
  const int k = static_cast<int>(centroids.size());
  while (true) {
    std::vector<int> counts(k, 0);
    for (int a : assign) ++counts[a];
    const auto empty = std::find(counts.begin(), counts.end(), 0);
    if (empty == counts.end()) return;
    const int e = static_cast<int>(empty - counts.begin());
    std::size_t far = 0;
    double far_d = -1.0;
    for (std::size_t i = 0; i < assign.size(); ++i) {
      if (counts[assign[i]] > 1 && d[i][assign[i]] > far_d) {
        far_d = d[i][assign[i]];
        far = i;
      }
    }
    centroids[e] = dataset[far];
    std::vector<std::pair<std::size_t, std::size_t>> cells;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      if (i != far) cells.emplace_back(i, static_cast<std::size_t>(e));
    }
    fill_columns(d, dataset, centroids, cells, options);
    d[far][e] = 0.0;
    assign[far] = e;
  }
}

ClusterResult lloyd(const std::vector<TsrvcPair>& dataset, std::vector<TsrvcPair> centroids, Matrix d,
                    const ClusterOptions& options) {
  const int k = static_cast<int>(centroids.size());
  std::vector<int> assign = nearest(d);
  ClusterResult result;
  result.k = k;
  int iteration = 0;
  while (iteration < options.max_iter) {
    ++iteration;
    reseed_empty(dataset, centroids, d, assign, options);

    std::vector<std::pair<std::size_t, std::size_t>> cells;
    for (int j = 0; j < k; ++j) {
      std::vector<std::size_t> members;
      for (std::size_t i = 0; i < assign.size(); ++i) {
        if (assign[i] == j) members.push_back(i);
      }
      std::vector<TsrvcPair> items;
      for (auto i : members) items.push_back(dataset[i]);
      KarcherOptions karcher = options.karcher;
      karcher.threads = options.threads;
      karcher.init = centroids[j];
      KarcherResult mean = karcher_mean(items, karcher);
      centroids[j] = mean.mean;
      // Members' distances come with the mean; everything else is recomputed.
      for (std::size_t m = 0; m < members.size(); ++m) d[members[m]][j] = mean.distances[m];
      for (std::size_t i = 0; i < assign.size(); ++i) {
        if (assign[i] != j) cells.emplace_back(i, static_cast<std::size_t>(j));
      }
    }
    fill_columns(d, dataset, centroids, cells, options);
    result.asse_history.push_back(asse_of(d, assign));

    std::vector<int> next = nearest(d);
    if (next == assign) break;
    assign = std::move(next);
  }
  reseed_empty(dataset, centroids, d, assign, options);

  result.iterations = iteration;
  result.assignments = assign;
  result.centroids = std::move(centroids);
  for (std::size_t i = 0; i < assign.size(); ++i) result.distances.push_back(d[i][assign[i]]);
  result.asse = asse_of(d, assign);
  result.asse_history.push_back(result.asse);
  return result;
}

std::vector<std::size_t> sample_without_replacement(std::size_t n, int k, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::uint64_t state = seed;
  for (int t = 0; t < k; ++t) {
    state = derive_seed(state, static_cast<std::uint64_t>(t));
    const std::size_t j = static_cast<std::size_t>(t) + state % (n - static_cast<std::size_t>(t));
    std::swap(idx[t], idx[j]);
  }
  idx.resize(static_cast<std::size_t>(k));
  return idx;
}

// Union-find over items linked by co-assignment frequency above one half.
std::vector<std::vector<std::size_t>> components(const Matrix& m) {
  const std::size_t n = m.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (m[i][j] > 0.5) parent[std::max(find(i), find(j))] = std::min(find(i), find(j));
    }
  }
  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < n; ++i) groups[find(i)].push_back(i);
  std::vector<std::vector<std::size_t>> out;
  for (auto& [root, members] : groups) out.push_back(std::move(members));
  return out;
}

double association(const Matrix& m, const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  double sum = 0.0;
  for (auto i : a) {
    for (auto j : b) sum += m[i][j];
  }
  return sum / static_cast<double>(a.size() * b.size());
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t run) {
  // splitmix64 finalizer
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (run + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

ClusterResult kmeans(const std::vector<TsrvcPair>& dataset, int k, std::uint64_t seed, const ClusterOptions& options,
                     const DistanceMatrix* members) {
  require_k(k, dataset.size());
  const auto init = sample_without_replacement(dataset.size(), k, seed);
  std::vector<TsrvcPair> centroids;
  for (auto i : init) centroids.push_back(dataset[i]);
  Matrix d;
  if (members) {
    d.assign(dataset.size(), std::vector<double>(init.size(), 0.0));
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      for (std::size_t j = 0; j < init.size(); ++j) d[i][j] = (*members)[i][init[j]];
    }
  } else {
    d = fresh_distances(dataset, centroids, options);
  }
  return lloyd(dataset, std::move(centroids), std::move(d), options);
}

ClusterResult kmeans_from(const std::vector<TsrvcPair>& dataset, std::vector<TsrvcPair> centroids,
                          const ClusterOptions& options) {
  require_k(static_cast<int>(centroids.size()), dataset.size());
  Matrix d = fresh_distances(dataset, centroids, options);
  return lloyd(dataset, std::move(centroids), std::move(d), options);
}

std::vector<ElbowPoint> elbow_curve(const std::vector<TsrvcPair>& dataset, std::vector<int> k_values, int restarts,
                                    std::uint64_t seed, const ClusterOptions& options, const DistanceMatrix* members) {
  if (restarts < 1) throw Error(ErrorCode::InvalidArgument, "restarts must be positive");
  std::sort(k_values.begin(), k_values.end());
  k_values.erase(std::unique(k_values.begin(), k_values.end()), k_values.end());
  for (int k : k_values) require_k(k, dataset.size());

  std::vector<ElbowPoint> curve;
  std::optional<ClusterResult> previous;
  for (int k : k_values) {
    std::optional<ClusterResult> best;
    for (int r = 0; r < restarts; ++r) {
      ClusterResult run = kmeans(dataset, k, derive_seed(derive_seed(seed, k), r), options, members);
      if (!best || run.asse < best->asse) best = std::move(run);
    }
    if (previous) {
      // Previous centroids plus the items that fit them worst.
      std::vector<std::size_t> order(dataset.size());
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return previous->distances[a] > previous->distances[b]; });
      std::vector<TsrvcPair> centroids = previous->centroids;
      for (std::size_t t = 0; static_cast<int>(centroids.size()) < k; ++t) centroids.push_back(dataset[order[t]]);
      ClusterResult warm = kmeans_from(dataset, std::move(centroids), options);
      if (warm.asse < best->asse) best = std::move(warm);
    }
    best->restarts_used = restarts;
    curve.push_back({k, best->asse});
    previous = std::move(best);
  }
  return curve;
}

int elbow_choice(const std::vector<ElbowPoint>& curve) {
  if (curve.size() < 2) throw Error(ErrorCode::InvalidArgument, "elbow needs at least two points");
  int choice = curve[1].k;
  double largest = -std::numeric_limits<double>::infinity();
  for (std::size_t t = 1; t < curve.size(); ++t) {
    const double prev = curve[t - 1].asse;
    const double drop = prev > 0.0 ? (prev - curve[t].asse) / prev : 0.0;
    if (drop > largest) {
      largest = drop;
      choice = curve[t].k;
    }
  }
  return choice;
}

ConsensusResult consensus(const std::vector<TsrvcPair>& dataset, int k, int runs, std::uint64_t seed,
                          const ClusterOptions& options, const DistanceMatrix* members) {
  if (runs < 1) throw Error(ErrorCode::InvalidArgument, "runs must be positive");
  require_k(k, dataset.size());
  const std::size_t n = dataset.size();

  Matrix votes(n, std::vector<double>(n, 0.0));
  for (int r = 0; r < runs; ++r) {
    const ClusterResult run = kmeans(dataset, k, derive_seed(seed, static_cast<std::uint64_t>(r)), options, members);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (run.assignments[i] == run.assignments[j]) votes[i][j] += 1.0;
      }
    }
  }
  for (auto& row : votes) {
    for (auto& v : row) v /= runs;
  }

  auto groups = components(votes);
  while (static_cast<int>(groups.size()) > k) {
    // Merge the smallest group into the group it is most often co-assigned with.
    std::size_t small = 0;
    for (std::size_t g = 1; g < groups.size(); ++g) {
      if (groups[g].size() <= groups[small].size()) small = g;
    }
    std::size_t target = small == 0 ? 1 : 0;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      if (g != small && association(votes, groups[small], groups[g]) > association(votes, groups[small], groups[target])) {
        target = g;
      }
    }
    groups[target].insert(groups[target].end(), groups[small].begin(), groups[small].end());
    std::sort(groups[target].begin(), groups[target].end());
    groups.erase(groups.begin() + static_cast<std::ptrdiff_t>(small));
  }
  std::uint64_t split_seed = derive_seed(seed, static_cast<std::uint64_t>(runs));
  while (static_cast<int>(groups.size()) < k) {
    std::size_t large = 0;
    for (std::size_t g = 1; g < groups.size(); ++g) {
      if (groups[g].size() > groups[large].size()) large = g;
    }
    const auto group = groups[large];
    std::vector<TsrvcPair> items;
    for (auto i : group) items.push_back(dataset[i]);
    DistanceMatrix sub;
    if (members) {
      for (auto i : group) {
        sub.emplace_back();
        for (auto j : group) sub.back().push_back((*members)[i][j]);
      }
    }
    const ClusterResult split = kmeans(items, 2, split_seed, options, members ? &sub : nullptr);
    split_seed = derive_seed(split_seed, 1);
    std::vector<std::size_t> first, second;
    for (std::size_t m = 0; m < group.size(); ++m) (split.assignments[m] == 0 ? first : second).push_back(group[m]);
    groups[large] = std::move(first);
    groups.push_back(std::move(second));
  }
  std::sort(groups.begin(), groups.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });

  ClusterResult result;
  result.k = k;
  result.restarts_used = runs;
  result.assignments.assign(n, 0);
  result.distances.assign(n, 0.0);
  double total = 0.0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    std::vector<TsrvcPair> items;
    for (auto i : groups[g]) {
      result.assignments[i] = static_cast<int>(g);
      items.push_back(dataset[i]);
    }
    KarcherOptions karcher = options.karcher;
    karcher.threads = options.threads;
    const KarcherResult mean = karcher_mean(items, karcher);
    result.centroids.push_back(mean.mean);
    for (std::size_t m = 0; m < groups[g].size(); ++m) {
      result.distances[groups[g][m]] = mean.distances[m];
      total += mean.distances[m] * mean.distances[m];
    }
  }
  result.asse = total / static_cast<double>(n);
  result.asse_history = {result.asse};
  return ConsensusResult{std::move(result), CoAssignmentMatrix{std::move(votes)}};
}

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) throw Error(ErrorCode::InvalidArgument, "labelings differ in length");
  const std::size_t n = a.size();
  std::map<std::pair<int, int>, double> table;
  std::map<int, double> rows, cols;
  for (std::size_t i = 0; i < n; ++i) {
    table[{a[i], b[i]}] += 1.0;
    rows[a[i]] += 1.0;
    cols[b[i]] += 1.0;
  }
  auto pairs = [](double x) { return x * (x - 1.0) / 2.0; };
  double index = 0.0, sum_rows = 0.0, sum_cols = 0.0;
  for (const auto& [key, count] : table) index += pairs(count);
  for (const auto& [key, count] : rows) sum_rows += pairs(count);
  for (const auto& [key, count] : cols) sum_cols += pairs(count);
  const double total = pairs(static_cast<double>(n));
  const double expected = total > 0.0 ? sum_rows * sum_cols / total : 0.0;
  const double max_index = 0.5 * (sum_rows + sum_cols);
  if (max_index == expected) return index == max_index ? 1.0 : 0.0;
  return (index - expected) / (max_index - expected);
}

}  // namespace sphtraj
