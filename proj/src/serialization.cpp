#include "sphtraj/serialization.hpp"

#include <string>

namespace sphtraj {

using nlohmann::json;

namespace {

json curve_json(const TangentCurve& c) {
  json out = json::array();
  for (const auto& v : c) out.push_back(to_json(v));
  return out;
}

TangentCurve curve_from_json(const json& j) {
  TangentCurve c;
  for (const auto& v : j) c.push_back(vec3_from_json(v));
  return c;
}

json vector_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

// Column-major list of columns.
json matrix_json(const Eigen::MatrixXd& m) {
  json cols = json::array();
  for (Eigen::Index c = 0; c < m.cols(); ++c) cols.push_back(vector_json(m.col(c)));
  return cols;
}

Eigen::VectorXd vector_from_json(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Eigen::MatrixXd matrix_from_json(const json& j, Eigen::Index rows) {
  Eigen::MatrixXd m(rows, static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    const Eigen::VectorXd col = vector_from_json(j.at(static_cast<std::size_t>(c)));
    if (col.size() != rows) throw Error(ErrorCode::MalformedInput, "matrix column has the wrong length");
    m.col(c) = col;
  }
  return m;
}

}  // namespace

json to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

json to_json(const Trajectory& t) {
  json out = json::array();
  for (const auto& p : t.samples()) out.push_back(to_json(p.coords()));
  return out;
}

json to_json(const TsrvcPair& p) { return {{"start", to_json(p.start.coords())}, {"q", curve_json(p.q)}}; }

json to_json(const Warp& w) { return w.values(); }

json to_json(const BundleTangent& v) {
  return {{"base", to_json(v.base.coords())}, {"u", to_json(v.u)}, {"w", curve_json(v.w)}};
}

json to_json(const AlignmentResult& r) {
  return {{"distance", r.distance}, {"theta", r.theta}, {"warp", to_json(r.warp)}, {"aligned", to_json(r.aligned)}};
}

json to_json(const KarcherResult& r) {
  json aligned = json::array(), phases = json::array(), shooting = json::array();
  for (const auto& a : r.aligned) aligned.push_back(to_json(a));
  for (const auto& p : r.phases) phases.push_back(to_json(p));
  for (const auto& s : r.shooting) shooting.push_back(to_json(s));
  return {{"mean", to_json(r.mean)},
          {"mean_track", to_json(integrate(r.mean))},
          {"aligned", aligned},
          {"phases", phases},
          {"shooting", shooting},
          {"distances", r.distances},
          {"iterations", r.iterations},
          {"final_gradient_norm", r.final_gradient_norm},
          {"objective", r.objective},
          {"converged", r.converged}};
}

json to_json(const CrossSectionalSummary& s) {
  json variances = json::array();
  for (const auto& v : s.variance_at) {
    json cov = json::array();
    for (int r = 0; r < 3; ++r) cov.push_back(json::array({v.covariance(r, 0), v.covariance(r, 1), v.covariance(r, 2)}));
    variances.push_back({{"index", v.index}, {"trace", v.trace}, {"covariance", cov}});
  }
  return {{"mean_track", to_json(s.mean_track)}, {"variance_at", variances}};
}

json to_json(const PcaModel& m) {
  return {{"mean", to_json(m.mean)},
          {"frame", {to_json(m.v1), to_json(m.v2)}},
          {"u_basis", matrix_json(m.u_basis)},
          {"u_variances", vector_json(m.u_variances)},
          {"u_center", vector_json(m.u_center)},
          {"u_coefficients", matrix_json(m.u_coefficients)},
          {"u_explained_ratio", vector_json(m.u_explained_ratio())},
          {"w_basis", matrix_json(m.w_basis)},
          {"w_variances", vector_json(m.w_variances)},
          {"w_center", vector_json(m.w_center)},
          {"w_coefficients", matrix_json(m.w_coefficients)},
          {"w_total_variance", m.w_total_variance},
          {"w_explained_ratio", vector_json(m.w_explained_ratio())},
          {"rank", m.rank()}};
}

json to_json(const ClusterResult& r) {
  json centroids = json::array(), members = json::array();
  for (const auto& c : r.centroids) centroids.push_back({{"tsrvc", to_json(c)}, {"track", to_json(integrate(c))}});
  for (int c = 0; c < r.k; ++c) {
    json ids = json::array();
    for (std::size_t i = 0; i < r.assignments.size(); ++i) {
      if (r.assignments[i] == c) ids.push_back(i);
    }
    members.push_back(ids);
  }
  return {{"k", r.k},
          {"assignments", r.assignments},
          {"members", members},
          {"centroids", centroids},
          {"asse", r.asse},
          {"distances", r.distances},
          {"iterations", r.iterations},
          {"restarts_used", r.restarts_used}};
}

json to_json(const CoAssignmentMatrix& m) { return m.matrix; }

json to_json(const std::vector<ElbowPoint>& curve) {
  json out = json::array();
  for (const auto& p : curve) out.push_back({{"k", p.k}, {"asse", p.asse}});
  return out;
}

Vec3 vec3_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorCode::MalformedInput, "expected a 3-vector");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

Trajectory trajectory_from_json(const json& j) {
  std::vector<Vec3> pts;
  for (const auto& p : j) pts.push_back(vec3_from_json(p));
  return Trajectory::from_coords(pts);
}

TsrvcPair tsrvc_from_json(const json& j) {
  return TsrvcPair(SpherePoint(vec3_from_json(j.at("start"))), curve_from_json(j.at("q")));
}

PcaModel pca_model_from_json(const json& j) {
  try {
    const TsrvcPair mean = tsrvc_from_json(j.at("mean"));
    const auto dim = static_cast<Eigen::Index>(2 * mean.size());
    PcaModel m{mean,
               vec3_from_json(j.at("frame").at(0)),
               vec3_from_json(j.at("frame").at(1)),
               matrix_from_json(j.at("u_basis"), 2),
               vector_from_json(j.at("u_variances")),
               vector_from_json(j.at("u_center")),
               matrix_from_json(j.at("u_coefficients"), 2),
               matrix_from_json(j.at("w_basis"), dim),
               vector_from_json(j.at("w_variances")),
               vector_from_json(j.at("w_center")),
               Eigen::MatrixXd(),
               j.at("w_total_variance").get<double>()};
    const auto r = m.w_basis.cols();
    m.w_coefficients = matrix_from_json(j.at("w_coefficients"), r);
    if (m.w_variances.size() != r || m.w_center.size() != dim) {
      throw Error(ErrorCode::MalformedInput, "PCA model blocks have inconsistent sizes");
    }
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedInput, std::string("PCA model JSON: ") + e.what());
  }
}

std::string dump_json(const json& j) { return j.dump(2); }

}  // namespace sphtraj
