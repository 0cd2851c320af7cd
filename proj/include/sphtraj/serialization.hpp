#pragma once

#include <json.hpp>

#include "sphtraj/clustering.hpp"

namespace sphtraj {

// JSON views of the result types. Vectors are [x, y, z] arrays; curves are arrays
// of those. Doubles are written with full precision by the caller's dump settings.

nlohmann::json to_json(const Vec3& v);
nlohmann::json to_json(const Trajectory& t);
nlohmann::json to_json(const TsrvcPair& p);
nlohmann::json to_json(const Warp& w);
nlohmann::json to_json(const BundleTangent& v);
nlohmann::json to_json(const AlignmentResult& r);
nlohmann::json to_json(const KarcherResult& r);
nlohmann::json to_json(const CrossSectionalSummary& s);
nlohmann::json to_json(const PcaModel& m);
nlohmann::json to_json(const ClusterResult& r);
nlohmann::json to_json(const CoAssignmentMatrix& m);
nlohmann::json to_json(const std::vector<ElbowPoint>& curve);

Vec3 vec3_from_json(const nlohmann::json& j);
Trajectory trajectory_from_json(const nlohmann::json& j);
TsrvcPair tsrvc_from_json(const nlohmann::json& j);
/// Inverse of to_json(PcaModel); throws MalformedInput on schema violations.
PcaModel pca_model_from_json(const nlohmann::json& j);

/// Serializes with 17 significant digits so doubles round-trip exactly.
std::string dump_json(const nlohmann::json& j);

}  // namespace sphtraj
