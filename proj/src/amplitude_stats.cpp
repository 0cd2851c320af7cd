#include "sphtraj/amplitude_stats.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace sphtraj {

namespace {

struct Alignments {
  std::vector<AlignmentResult> items;
  double objective = 0.0;
};

Alignments align_all(const TsrvcPair& mean, const std::vector<TsrvcPair>& dataset, const KarcherOptions& options) {
  std::vector<std::optional<AlignmentResult>> slots(dataset.size());
  parallel_for(
      dataset.size(), [&](std::size_t i) { slots[i] = amplitude_distance(mean, dataset[i], options.alignment); },
      options.threads);
  Alignments out;
  out.items.reserve(dataset.size());
  for (auto& s : slots) {
    out.objective += s->distance * s->distance;
    out.items.push_back(std::move(*s));
  }
  return out;
}

std::vector<BundleTangent> shooting_vectors(const TsrvcPair& mean, const Alignments& alignments) {
  std::vector<BundleTangent> out;
  out.reserve(alignments.items.size());
  for (const auto& a : alignments.items) {
    out.push_back(log_along(mean, a.aligned, connecting_arc(mean.start, a.aligned.start, a.theta)));
  }
  return out;
}

BundleTangent average(const SpherePoint& base, const std::vector<BundleTangent>& vs) {
  BundleTangent avg = BundleTangent::zero(base, vs.front().w.size());
  const double scale = 1.0 / static_cast<double>(vs.size());
  for (const auto& v : vs) {
    avg.u += scale * v.u;
    for (std::size_t k = 0; k < avg.w.size(); ++k) avg.w[k] += scale * v.w[k];
  }
  return avg;
}

// Flips each column so that its largest-magnitude entry is positive.
template <class M>
void fix_signs(M& basis) {
  for (Eigen::Index c = 0; c < basis.cols(); ++c) {
    Eigen::Index row = 0;
    basis.col(c).cwiseAbs().maxCoeff(&row);
    if (basis(row, c) < 0.0) basis.col(c) *= -1.0;
  }
}

}  // namespace

std::size_t medoid_index(const std::vector<TsrvcPair>& dataset, const GeodesicOptions& options, unsigned threads) {
  const std::size_t n = dataset.size();
  if (n == 0) throw Error(ErrorCode::EmptyDataset, "medoid of an empty dataset");
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  }
  std::vector<double> d2(pairs.size());
  parallel_for(
      pairs.size(),
      [&](std::size_t t) {
        const double d = geodesic(dataset[pairs[t].first], dataset[pairs[t].second], options).length;
        d2[t] = d * d;
      },
      threads);
  std::vector<double> total(n, 0.0);
  for (std::size_t t = 0; t < pairs.size(); ++t) {
    total[pairs[t].first] += d2[t];
    total[pairs[t].second] += d2[t];
  }
  return static_cast<std::size_t>(std::min_element(total.begin(), total.end()) - total.begin());
}

KarcherResult karcher_mean(const std::vector<TsrvcPair>& dataset, const KarcherOptions& options) {
  if (dataset.empty()) throw Error(ErrorCode::EmptyDataset, "Karcher mean of an empty dataset");
  for (const auto& item : dataset) {
    if (item.size() != dataset.front().size()) throw Error(ErrorCode::GridMismatch, "items on different grids");
  }

  TsrvcPair mean = options.init ? *options.init
                                : dataset[medoid_index(dataset, options.alignment, options.threads)];
  Alignments current = align_all(mean, dataset, options);
  double step = options.step;
  int iteration = 0;
  double gradient = std::numeric_limits<double>::infinity();
  bool converged = false;
  std::vector<BundleTangent> shooting;

  while (true) {
    ++iteration;
    shooting = shooting_vectors(mean, current);
    const BundleTangent direction = average(mean.start, shooting);
    gradient = direction.u.norm() + std::sqrt(l2_norm_sq(direction.w));
    if (gradient < options.tol) {
      converged = true;
      break;
    }
    if (iteration >= options.max_iter) break;

    bool accepted = false;
    while (step >= options.min_step) {
      TsrvcPair candidate = bundle_exp(mean, direction, step);
      Alignments next = align_all(candidate, dataset, options);
      if (next.objective <= current.objective) {
        mean = std::move(candidate);
        current = std::move(next);
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
  }

  KarcherResult result{mean, {}, {}, std::move(shooting), {}, iteration, gradient, current.objective, converged};
  for (auto& a : current.items) {
    result.distances.push_back(a.distance);
    result.phases.push_back(std::move(a.warp));
    result.aligned.push_back(std::move(a.aligned));
  }
  return result;
}

CrossSectionalSummary cross_sectional_summary(const std::vector<Trajectory>& dataset,
                                              const std::vector<std::size_t>& sample_indices) {
  if (dataset.empty()) throw Error(ErrorCode::EmptyDataset, "no trajectories");
  const std::size_t size = dataset.front().size();
  for (const auto& t : dataset) {
    if (t.size() != size) throw Error(ErrorCode::GridMismatch, "trajectories on different grids");
  }
  const double n = static_cast<double>(dataset.size());

  std::vector<Vec3> sums(size, Vec3::Zero());
  for (const auto& t : dataset) {
    for (std::size_t k = 0; k < size; ++k) sums[k] += t[k].coords();
  }
  std::vector<SpherePoint> mean_points;
  mean_points.reserve(size);
  for (std::size_t k = 0; k < size; ++k) {
    const Vec3 avg = sums[k] / n;
    if (avg.norm() < 1e-6) {
      throw Error(ErrorCode::DegenerateMean, "extrinsic mean vanishes at index " + std::to_string(k));
    }
    mean_points.emplace_back(avg.normalized());
  }

  std::vector<std::size_t> indices = sample_indices;
  if (indices.empty()) {
    for (std::size_t k = 0; k < size; ++k) indices.push_back(k);
  }
  std::vector<CrossSectionalVariance> variances;
  for (std::size_t k : indices) {
    if (k >= size) throw Error(ErrorCode::IndexOutOfRange, "sample index " + std::to_string(k));
    const Vec3 avg = sums[k] / n;
    Mat3 cov = Mat3::Zero();
    if (dataset.size() > 1) {
      for (const auto& t : dataset) {
        const Vec3 d = t[k].coords() - avg;
        cov += d * d.transpose();
      }
      cov /= n - 1.0;
    }
    variances.push_back({k, cov, cov.trace()});
  }
  return CrossSectionalSummary{Trajectory(std::move(mean_points)), std::move(variances)};
}

// PCA -------------------------------------------------------------------------------

Eigen::VectorXd w_coordinates(const TangentCurve& w, const Vec3& v1, const Vec3& v2) {
  Eigen::VectorXd out(2 * w.size());
  for (std::size_t k = 0; k < w.size(); ++k) {
    out(2 * k) = w[k].dot(v1);
    out(2 * k + 1) = w[k].dot(v2);
  }
  return out;
}

TangentCurve w_from_coordinates(const Eigen::VectorXd& coords, const Vec3& v1, const Vec3& v2) {
  TangentCurve w(static_cast<std::size_t>(coords.size() / 2));
  for (std::size_t k = 0; k < w.size(); ++k) w[k] = coords(2 * k) * v1 + coords(2 * k + 1) * v2;
  return w;
}

Eigen::Vector2d PcaModel::u_explained_ratio() const {
  const double total = u_variances.sum();
  return total > 0.0 ? Eigen::Vector2d(u_variances / total) : Eigen::Vector2d::Zero();
}

Eigen::VectorXd PcaModel::w_explained_ratio() const {
  return w_total_variance > 0.0 ? Eigen::VectorXd(w_variances / w_total_variance)
                                : Eigen::VectorXd::Zero(w_variances.size());
}

BundleTangent PcaModel::tangent(const Eigen::Vector2d& cu, const Eigen::VectorXd& cw) const {
  const Eigen::Vector2d u = u_basis * cu;
  return BundleTangent{mean.start, u(0) * v1 + u(1) * v2, w_from_coordinates(w_basis * cw, v1, v2)};
}

PcaModel fit_pca(const KarcherResult& result, int r) {
  const auto n = static_cast<Eigen::Index>(result.shooting.size());
  const auto dim = static_cast<Eigen::Index>(2 * result.mean.size());
  if (r < 1 || r > n - 1 || r > dim) {
    throw Error(ErrorCode::RankTooLarge,
                "rank " + std::to_string(r) + " with " + std::to_string(n) + " items and " +
                    std::to_string(dim) + " coordinates");
  }
  const Vec3& p = result.mean.start.coords();
  const Vec3 v1 = s2::seed_tangent(p);
  const Vec3 v2 = p.cross(v1);

  Eigen::Matrix2Xd xu(2, n);
  Eigen::MatrixXd xw(dim, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& s = result.shooting[static_cast<std::size_t>(i)];
    xu.col(i) << s.u.dot(v1), s.u.dot(v2);
    xw.col(i) = w_coordinates(s.w, v1, v2);
  }
  const Eigen::Vector2d u_center = xu.rowwise().mean();
  const Eigen::VectorXd w_center = xw.rowwise().mean();
  xu.colwise() -= u_center;
  xw.colwise() -= w_center;
  const double norm = 1.0 / std::sqrt(static_cast<double>(n - 1));

  const Eigen::JacobiSVD<Eigen::MatrixXd> su(xu * norm, Eigen::ComputeFullU);
  Eigen::Matrix2d u_basis = su.matrixU();
  fix_signs(u_basis);
  const Eigen::Vector2d u_variances = su.singularValues().array().square();

  const Eigen::BDCSVD<Eigen::MatrixXd> sw(xw * norm, Eigen::ComputeThinU);
  Eigen::MatrixXd w_basis = sw.matrixU().leftCols(r);
  fix_signs(w_basis);
  const Eigen::VectorXd all_w = sw.singularValues().array().square();

  PcaModel model{result.mean,
                 v1,
                 v2,
                 u_basis,
                 u_variances,
                 u_center,
                 u_basis.transpose() * xu,
                 w_basis,
                 all_w.head(r),
                 w_center,
                 w_basis.transpose() * xw,
                 all_w.sum()};
  return model;
}

Trajectory pca_mode_path(const PcaModel& model, PcaComponent component, int index, double tau) {
  Eigen::Vector2d cu = Eigen::Vector2d::Zero();
  Eigen::VectorXd cw = Eigen::VectorXd::Zero(model.rank());
  if (component == PcaComponent::U) {
    if (index < 0 || index >= 2) throw Error(ErrorCode::IndexOutOfRange, "u component " + std::to_string(index));
    cu(index) = tau * std::sqrt(model.u_variances(index));
  } else {
    if (index < 0 || index >= model.rank()) {
      throw Error(ErrorCode::IndexOutOfRange, "w component " + std::to_string(index));
    }
    cw(index) = tau * std::sqrt(model.w_variances(index));
  }
  return integrate(bundle_exp(model.mean, model.tangent(cu, cw)));
}

std::vector<CoefficientSample> sample_coefficients(const PcaModel& model, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<CoefficientSample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    CoefficientSample s{Eigen::Vector2d::Zero(), Eigen::VectorXd::Zero(model.rank())};
    for (int k = 0; k < 2; ++k) s.cu(k) = std::sqrt(model.u_variances(k)) * normal(rng);
    for (int k = 0; k < model.rank(); ++k) s.cw(k) = std::sqrt(model.w_variances(k)) * normal(rng);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<Trajectory> sample_wrapped_gaussian(const PcaModel& model, std::size_t n, std::uint64_t seed) {
  std::vector<Trajectory> out;
  out.reserve(n);
  for (const auto& c : sample_coefficients(model, n, seed)) {
    out.push_back(integrate(bundle_exp(model.mean, model.tangent(c.cu, c.cw))));
  }
  return out;
}

}  // namespace sphtraj
