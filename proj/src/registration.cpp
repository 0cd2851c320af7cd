#include "sphtraj/registration.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <string>
#include <thread>

namespace sphtraj {

namespace {

constexpr int kSteps = static_cast<int>(std::size(kLatticeSteps));
constexpr double kInf = std::numeric_limits<double>::infinity();

double slope(int s) {
  return static_cast<double>(kLatticeSteps[s].second) / static_cast<double>(kLatticeSteps[s].first);
}

bool same_point(const SpherePoint& a, const SpherePoint& b) {
  return (a.coords() - b.coords()).norm() <= 1e-9;
}

// Weighted cost of the samples strictly inside a lattice segment starting at (i, j).
double segment_interior(const TangentCurve& qref, const TangentCurve& qmov, double weight, int i, int j,
                        int s) {
  const auto [di, dj] = kLatticeSteps[s];
  if (di == 1) return 0.0;
  const double m = slope(s);
  const double root = std::sqrt(m);
  double sum = 0.0;
  for (int r = 1; r < di; ++r) {
    const double x = static_cast<double>(j) + r * m;
    const int lo = static_cast<int>(std::floor(x));
    const double f = x - lo;
    const Vec3 mov = (1.0 - f) * qmov[lo] + f * qmov[lo + 1];
    sum += (qref[i + r] - root * mov).squaredNorm();
  }
  return weight * sum;
}

}  // namespace

Warp warp_from_lattice_path(const std::vector<std::pair<int, int>>& nodes, std::size_t size) {
  const int last = static_cast<int>(size) - 1;
  if (nodes.empty() || nodes.front() != std::pair{0, 0} || nodes.back() != std::pair{last, last}) {
    throw Error(ErrorCode::InvalidWarp, "lattice path must join (0,0) and (T-1,T-1)");
  }
  std::vector<double> values(size);
  const double scale = static_cast<double>(last);
  for (std::size_t n = 0; n + 1 < nodes.size(); ++n) {
    const auto [i, j] = nodes[n];
    const int di = nodes[n + 1].first - i;
    const int dj = nodes[n + 1].second - j;
    if (std::find(std::begin(kLatticeSteps), std::end(kLatticeSteps), std::pair{di, dj}) ==
        std::end(kLatticeSteps)) {
      throw Error(ErrorCode::InvalidWarp, "step not on the lattice");
    }
    for (int r = 0; r < di; ++r) {
      values[i + r] = (static_cast<double>(j) + r * static_cast<double>(dj) / di) / scale;
    }
  }
  values[last] = 1.0;
  return Warp(std::move(values));
}

DpResult dp_warp(const TangentCurve& qref, const TangentCurve& qmov) {
  if (qref.size() != qmov.size()) {
    throw Error(ErrorCode::GridMismatch,
                std::to_string(qref.size()) + " vs " + std::to_string(qmov.size()) + " samples");
  }
  const int n = static_cast<int>(qref.size());
  if (n < 2) throw Error(ErrorCode::GridMismatch, "need at least two samples");
  const double delta = grid_step(qref.size());

  double rate[kSteps], root[kSteps], mid_root[kSteps][kSteps], mid_rate[kSteps][kSteps];
  for (int s = 0; s < kSteps; ++s) {
    rate[s] = slope(s);
    root[s] = std::sqrt(rate[s]);
    for (int r = 0; r < kSteps; ++r) {
      mid_rate[r][s] = 0.5 * (slope(r) + slope(s));
      mid_root[r][s] = std::sqrt(mid_rate[r][s]);
    }
  }
  std::vector<double> ref_sq(n), mov_sq(n);
  for (int k = 0; k < n; ++k) {
    ref_sq[k] = qref[k].squaredNorm();
    mov_sq[k] = qmov[k].squaredNorm();
  }
  auto weight = [&](int i) { return (i == 0 || i == n - 1) ? 0.5 * delta : delta; };
  auto node_cost = [&](int i, int j, double r) {
    return weight(i) * (qref[i] - r * qmov[j]).squaredNorm();
  };

  // best[(i*n + j)*kSteps + s]: cheapest cost of every sample before node (i, j)
  // (node samples and segment interiors), over paths entering (i, j) by step s.
  const std::size_t cells = static_cast<std::size_t>(n) * n * kSteps;
  std::vector<double> best(cells, kInf);
  std::vector<signed char> from(cells, -1);
  auto at = [n](int i, int j, int s) { return (static_cast<std::size_t>(i) * n + j) * kSteps + s; };

  // Slopes are bounded by 3 in both directions, so the end must stay reachable.
  auto usable = [n](int i, int j) {
    return i < n && j < n && 3 * (n - 1 - i) >= n - 1 - j && 3 * (n - 1 - j) >= n - 1 - i;
  };

  for (int s = 0; s < kSteps; ++s) {
    const auto [di, dj] = kLatticeSteps[s];
    if (!usable(di, dj)) continue;
    best[at(di, dj, s)] = node_cost(0, 0, root[s]) + segment_interior(qref, qmov, delta, 0, 0, s);
  }

  for (int i = 1; i < n - 1; ++i) {
    const int j_lo = std::max(1, (i + 2) / 3);
    const int j_hi = std::min(n - 2, 3 * i);
    for (int j = j_lo; j <= j_hi; ++j) {
      const double* in = &best[at(i, j, 0)];
      bool any = false;
      for (int s = 0; s < kSteps; ++s) any = any || in[s] != kInf;
      if (!any) continue;
      // |qref - r qmov|^2 expanded; the node terms of every (in, out) pair share these.
      const double w = weight(i);
      const double a = ref_sq[i], b = qref[i].dot(qmov[j]), c = mov_sq[j];
      for (int s_out = 0; s_out < kSteps; ++s_out) {
        const auto [di, dj] = kLatticeSteps[s_out];
        if (!usable(i + di, j + dj)) continue;
        double entry = kInf;
        int arg = -1;
        for (int s_in = 0; s_in < kSteps; ++s_in) {
          if (in[s_in] == kInf) continue;
          const double cost = in[s_in] + w * std::max(0.0, a - 2.0 * mid_root[s_in][s_out] * b + mid_rate[s_in][s_out] * c);
          if (cost < entry) {
            entry = cost;
            arg = s_in;
          }
        }
        const double total = entry + segment_interior(qref, qmov, delta, i, j, s_out);
        const std::size_t idx = at(i + di, j + dj, s_out);
        if (total < best[idx]) {
          best[idx] = total;
          from[idx] = static_cast<signed char>(arg);
        }
      }
    }
  }

  double cost = kInf;
  int last_step = -1;
  for (int s = 0; s < kSteps; ++s) {
    const double d = best[at(n - 1, n - 1, s)];
    if (d == kInf) continue;
    const double total = d + node_cost(n - 1, n - 1, root[s]);
    if (total < cost) {
      cost = total;
      last_step = s;
    }
  }

  std::vector<std::pair<int, int>> nodes{{n - 1, n - 1}};
  int i = n - 1, j = n - 1, s = last_step;
  while (s >= 0) {
    const int prev = from[at(i, j, s)];
    i -= kLatticeSteps[s].first;
    j -= kLatticeSteps[s].second;
    nodes.emplace_back(i, j);
    s = prev;
  }
  std::reverse(nodes.begin(), nodes.end());
  return DpResult{warp_from_lattice_path(nodes, qref.size()), cost};
}

DpResult refine_warp(const TangentCurve& qref, const TangentCurve& qmov, const Warp& coarse, int subdivisions,
                     int band) {
  const int n = static_cast<int>(qref.size());
  if (qmov.size() != qref.size() || coarse.size() != qref.size()) {
    throw Error(ErrorCode::GridMismatch, "refine_warp inputs on different grids");
  }
  if (subdivisions < 1 || band < 1) throw Error(ErrorCode::InvalidArgument, "refinement needs positive sizes");
  if (n < 3) return DpResult{coarse, l2_distance_sq(qref, warp_curve(qmov, coarse))};

  const int m = subdivisions;
  const int last = (n - 1) * m;  // fine positions 0..last
  const int d_min = (m + 2) / 3, d_max = 3 * m;
  const int steps = d_max - d_min + 1;
  const double delta = grid_step(qref.size());

  // Admissible fine positions per sample: the band, intersected with what the
  // slope bounds can reach from the start and still take to the end.
  std::vector<int> lo(n), hi(n);
  for (int i = 0; i < n; ++i) {
    const double center = coarse[static_cast<std::size_t>(i)] * last;
    lo[i] = std::max({static_cast<int>(std::floor(center)) - band * m, d_min * i, last - d_max * (n - 1 - i)});
    hi[i] = std::min({static_cast<int>(std::ceil(center)) + band * m, d_max * i, last - d_min * (n - 1 - i)});
    if (lo[i] > hi[i]) return DpResult{coarse, l2_distance_sq(qref, warp_curve(qmov, coarse))};
  }

  // Per (sample, position): <qref, qmov(x)> and |qmov(x)|^2 for the expanded node cost.
  std::vector<std::vector<double>> dot(n), sq(n), best(n);
  std::vector<std::vector<short>> from(n);
  for (int i = 0; i < n; ++i) {
    const int width = hi[i] - lo[i] + 1;
    dot[i].resize(width);
    sq[i].resize(width);
    best[i].assign(static_cast<std::size_t>(width) * steps, kInf);
    from[i].assign(static_cast<std::size_t>(width) * steps, -1);
    for (int j = lo[i]; j <= hi[i]; ++j) {
      const Vec3 mov = interpolate_curve(qmov, static_cast<double>(j) / last);
      dot[i][j - lo[i]] = qref[i].dot(mov);
      sq[i][j - lo[i]] = mov.squaredNorm();
    }
  }
  auto node = [&](int i, int j, double rate) {
    const double w = (i == 0 || i == n - 1) ? 0.5 * delta : delta;
    const double b = dot[i][j - lo[i]], c = sq[i][j - lo[i]];
    return w * std::max(0.0, qref[i].squaredNorm() - 2.0 * std::sqrt(rate) * b + rate * c);
  };

  // best[i][(j - lo) * steps + s]: cost of samples before i, entering (i, j) by step s.
  for (int s = 0; s < steps; ++s) {
    const int j = d_min + s;
    if (j < lo[1] || j > hi[1]) continue;
    best[1][static_cast<std::size_t>(j - lo[1]) * steps + s] = node(0, 0, static_cast<double>(j) / m);
  }
  for (int i = 1; i < n - 1; ++i) {
    for (int j = lo[i]; j <= hi[i]; ++j) {
      const double* in = &best[i][static_cast<std::size_t>(j - lo[i]) * steps];
      for (int s_out = 0; s_out < steps; ++s_out) {
        const int next = j + d_min + s_out;
        if (next < lo[i + 1] || next > hi[i + 1]) continue;
        double entry = kInf;
        int arg = -1;
        for (int s_in = 0; s_in < steps; ++s_in) {
          if (in[s_in] == kInf) continue;
          const double cost = in[s_in] + node(i, j, (2 * d_min + s_in + s_out) / (2.0 * m));
          if (cost < entry) {
            entry = cost;
            arg = s_in;
          }
        }
        const std::size_t idx = static_cast<std::size_t>(next - lo[i + 1]) * steps + s_out;
        if (entry < best[i + 1][idx]) {
          best[i + 1][idx] = entry;
          from[i + 1][idx] = static_cast<short>(arg);
        }
      }
    }
  }

  double cost = kInf;
  int s = -1;
  for (int k = 0; k < steps; ++k) {
    const double v = best[n - 1][k];
    if (v == kInf) continue;
    const double total = v + node(n - 1, last, static_cast<double>(d_min + k) / m);
    if (total < cost) {
      cost = total;
      s = k;
    }
  }
  if (s < 0) return DpResult{coarse, l2_distance_sq(qref, warp_curve(qmov, coarse))};

  std::vector<double> values(n);
  int j = last;
  for (int i = n - 1; i > 0; --i) {
    values[i] = static_cast<double>(j) / last;
    const int prev = from[i][static_cast<std::size_t>(j - lo[i]) * steps + s];
    j -= d_min + s;
    s = prev;
  }
  values[0] = 0.0;
  return DpResult{Warp(std::move(values)), cost};
}

AlignmentResult amplitude_distance(const TsrvcPair& a, const TsrvcPair& b, const AlignmentOptions& options) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::GridMismatch, std::to_string(a.size()) + " vs " + std::to_string(b.size()) + " samples");
  }
  if (a.start.coords().dot(b.start.coords()) <= -1.0 + kAntipodalTol) {
    throw Error(ErrorCode::AntipodalStartPoints, "start points are antipodal");
  }
  if (options.theta_grid < 1) throw Error(ErrorCode::InvalidArgument, "theta grid must be positive");

  // Band refinement around the lattice optimum, re-centred until it stops improving.
  auto polish = [](const TangentCurve& qref, const TangentCurve& qmov, DpResult dp) {
    for (int pass = 0; pass < 4; ++pass) {
      DpResult next = refine_warp(qref, qmov, dp.warp);
      if (!(next.cost < dp.cost)) break;
      dp = std::move(next);
    }
    return dp;
  };
  auto finish = [&](double theta, double energy, Warp warp) {
    TsrvcPair aligned = warp_tsrvc(b, warp);
    return AlignmentResult{std::sqrt(std::max(energy, 0.0)), std::move(warp), theta, std::move(aligned)};
  };

  if (same_point(a.start, b.start)) {
    TangentCurve qmov(b.size());
    for (std::size_t k = 0; k < qmov.size(); ++k) qmov[k] = s2::project_tangent(a.start.coords(), b.q[k]);
    DpResult dp = polish(a.q, qmov, dp_warp(a.q, qmov));
    return finish(0.0, dp.cost, std::move(dp.warp));
  }

  double best_energy = kInf;
  double best_theta = 0.0;
  Warp best_warp = Warp::identity(a.size());
  auto evaluate = [&](double theta) {
    const ArcBaseline arc = arc_family(a.start, b.start, theta);
    const double l2 = arc.speed() * arc.speed();
    if (l2 >= best_energy) return l2;  // the warp term is non-negative
    DpResult dp = dp_warp(transport_along_arc(a.q, arc), b.q);
    const double energy = l2 + dp.cost;
    if (energy < best_energy) {
      best_energy = energy;
      best_theta = arc.theta;
      best_warp = std::move(dp.warp);
    }
    return energy;
  };

  // The unaligned geodesic's angle goes first: it keeps d_a <= d and gives a tight
  // bound early. The grid is then visited by increasing baseline length so that
  // the bound l_beta^2 >= E prunes as many DP solves as possible.
  evaluate(geodesic(a, b, options).baseline.theta);
  const double step = 2.0 * std::numbers::pi / options.theta_grid;
  std::vector<std::pair<double, double>> order;
  for (int i = 0; i < options.theta_grid; ++i) {
    order.emplace_back(arc_family(a.start, b.start, step * i).speed(), step * i);
  }
  std::sort(order.begin(), order.end());
  for (const auto& [speed, theta] : order) {
    if (speed * speed >= best_energy) break;
    evaluate(theta);
  }
  const double center = best_theta;
  detail::golden_section(evaluate, center - step, center + step, options.theta_tol);

  const ArcBaseline arc = arc_family(a.start, b.start, best_theta);
  const double l2 = arc.speed() * arc.speed();
  const TangentCurve qref = transport_along_arc(a.q, arc);
  DpResult dp = polish(qref, b.q, DpResult{best_warp, best_energy - l2});
  return finish(best_theta, l2 + dp.cost, std::move(dp.warp));
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body, unsigned threads) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

std::vector<std::vector<double>> pairwise_distance_matrix(const std::vector<TsrvcPair>& dataset,
                                                          const AlignmentOptions& options, unsigned threads) {
  const std::size_t n = dataset.size();
  if (n < 2) throw Error(ErrorCode::EmptyDataset, "need at least two items");
  std::vector<std::pair<std::size_t, std::size_t>> tasks;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) tasks.emplace_back(i, j);
    }
  }
  std::vector<std::vector<double>> directed(n, std::vector<double>(n, 0.0));
  parallel_for(
      tasks.size(),
      [&](std::size_t t) {
        const auto [i, j] = tasks[t];
        try {
          directed[i][j] = amplitude_distance(dataset[i], dataset[j], options).distance;
        } catch (const Error& e) {
          if (e.code() != ErrorCode::AntipodalStartPoints) throw;
          throw Error(ErrorCode::AntipodalStartPoints,
                      "items " + std::to_string(i) + " and " + std::to_string(j) + ": " + e.what());
        }
      },
      threads);
  std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) m[i][j] = m[j][i] = 0.5 * (directed[i][j] + directed[j][i]);
  }
  return m;
}

}  // namespace sphtraj
