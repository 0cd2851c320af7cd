#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "sphtraj/registration.hpp"

namespace sphtraj {

struct KarcherOptions {
  /// Initial step size; halved whenever a step would increase the objective.
  double step = 0.5;
  double min_step = 1e-3;
  /// Stop once |u_bar| + ||w_bar|| falls below this.
  double tol = 1e-3;
  int max_iter = 50;
  AlignmentOptions alignment;
  unsigned threads = 0;
  /// Starting estimate; the medoid under the unaligned distance when absent.
  std::optional<TsrvcPair> init;
};

struct KarcherResult {
  TsrvcPair mean;
  /// Amplitudes q_i * gamma_i aligned to the mean (start points unchanged).
  std::vector<TsrvcPair> aligned;
  std::vector<Warp> phases;
  /// Shooting vectors from the mean to each aligned item, along the optimal arcs.
  std::vector<BundleTangent> shooting;
  std::vector<double> distances;
  int iterations = 0;
  double final_gradient_norm = 0.0;
  /// Sum of squared amplitude distances to the mean.
  double objective = 0.0;
  bool converged = false;
};

/// Karcher mean of amplitudes by alternating alignment and tangent-space averaging.
/// Non-convergence is reported through `converged`; the best iterate is returned.
KarcherResult karcher_mean(const std::vector<TsrvcPair>& dataset, const KarcherOptions& options = {});

/// Index of the item minimizing the sum of squared unaligned bundle distances.
std::size_t medoid_index(const std::vector<TsrvcPair>& dataset, const GeodesicOptions& options = {},
                         unsigned threads = 0);

struct CrossSectionalVariance {
  std::size_t index;
  Mat3 covariance;
  double trace;
};

struct CrossSectionalSummary {
  Trajectory mean_track;
  std::vector<CrossSectionalVariance> variance_at;
};

/// Extrinsic per-index mean (renormalized) and 3x3 sample covariance at the requested
/// indices (all indices when empty). Covariances use 1/(n-1) and are zero for n = 1.
CrossSectionalSummary cross_sectional_summary(const std::vector<Trajectory>& dataset,
                                              const std::vector<std::size_t>& sample_indices = {});

enum class PcaComponent { U, W };

/// Tangent-space PCA at the Karcher mean with the u and w blocks kept separate.
///
/// Coordinates: u_i -> (u.v1, u.v2); w_i -> (w_0.v1, w_0.v2, w_1.v1, ...), 2T values.
/// Both blocks are centered before the covariance is formed, so the coefficient
/// covariance of the training set equals the retained variances.
struct PcaModel {
  TsrvcPair mean;
  Vec3 v1;
  Vec3 v2;

  Eigen::Matrix2d u_basis;
  /// Eigenvalues of K_u (variances), non-increasing.
  Eigen::Vector2d u_variances;
  Eigen::Vector2d u_center;
  Eigen::Matrix2Xd u_coefficients;

  /// 2T x r orthonormal columns.
  Eigen::MatrixXd w_basis;
  /// Leading r eigenvalues of K_w, non-increasing.
  Eigen::VectorXd w_variances;
  Eigen::VectorXd w_center;
  /// r x n training coefficients U_r^T (w_i - w_center).
  Eigen::MatrixXd w_coefficients;
  /// Trace of K_w (all components).
  double w_total_variance = 0.0;

  int rank() const { return static_cast<int>(w_basis.cols()); }

  Eigen::Vector2d u_explained_ratio() const;
  Eigen::VectorXd w_explained_ratio() const;

  /// Bundle tangent at the mean for coefficients (c_u, c_w), without the centers.
  BundleTangent tangent(const Eigen::Vector2d& cu, const Eigen::VectorXd& cw) const;
};

/// Throws RankTooLarge unless 1 <= r <= min(n - 1, 2T).
PcaModel fit_pca(const KarcherResult& result, int r);

/// Coordinates of a curve tangent at the mean in the model frame, and back.
Eigen::VectorXd w_coordinates(const TangentCurve& w, const Vec3& v1, const Vec3& v2);
TangentCurve w_from_coordinates(const Eigen::VectorXd& coords, const Vec3& v1, const Vec3& v2);

/// Trajectory along principal direction `index` at tau * sigma_k (sigma_k = sqrt(variance)).
Trajectory pca_mode_path(const PcaModel& model, PcaComponent component, int index, double tau);

struct CoefficientSample {
  Eigen::Vector2d cu;
  Eigen::VectorXd cw;
};

/// Independent draws c_u ~ N(0, diag(u_variances)) and c_w ~ N(0, diag(w_variances)).
std::vector<CoefficientSample> sample_coefficients(const PcaModel& model, std::size_t n, std::uint64_t seed);

/// Pushes coefficient draws through the exponential map at the mean.
std::vector<Trajectory> sample_wrapped_gaussian(const PcaModel& model, std::size_t n, std::uint64_t seed);

}  // namespace sphtraj
