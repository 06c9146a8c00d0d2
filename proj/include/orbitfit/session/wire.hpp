#pragma once

// JSON bodies shared by the HTTP API, case files and the event log.
// Doubles are written in shortest round-trip form, so parse(dump(x)) == x bitwise.

#include "orbitfit/mesh/polyline.hpp"
#include "orbitfit/mesh/triangle_mesh.hpp"
#include "orbitfit/plate/fit.hpp"
#include "orbitfit/plate/placement.hpp"

#include <nlohmann/json.hpp>

#include <string_view>

namespace orbitfit::wire {

using Json = nlohmann::ordered_json;

/// Rotation defect at or below this is taken as-is.
inline constexpr double kRigidExactTol = 1e-9;
/// Defects below this are snapped to the nearest rotation; larger ones are rejected.
inline constexpr double kPolarCorrectionLimit = 1e-3;

/// Parses text, turning syntax errors into ErrorKind::Parse.
Json parse(std::string_view text, std::string_view what);

/// Member lookup that throws InvalidInput naming the field.
const Json& field(const Json& obj, std::string_view key);
double number(const Json& value, std::string_view what);
std::string text(const Json& value, std::string_view what);

Json to_json(const Vec3& v);
Vec3 vec3_from_json(const Json& j, std::string_view what);

/// {"matrix": [[r00, r01, r02, t0], ..., [0, 0, 0, 1]]}
Json to_json(const RigidTransform& t);
Mat4 matrix_from_json(const Json& j, std::string_view what);
/// Near-rigid matrices are polar-corrected, anything else is RejectedTransform.
RigidTransform rigid_from_matrix(const Mat4& m);

Json to_json(const HistoryEntry& h);
Json to_json(const Placement& p);
Placement placement_from_json(const Json& j);

Json to_json(const Polyline& c);
Polyline polyline_from_json(const Json& points, const std::string& name);

Json to_json(const CollisionReport& r);
Json to_json(const LiveSummary& s);
Json to_json(const EdgeReport& e);
Json to_json(const FitReport& r);

/// Flat vertex/triangle/normal arrays for the viewer.
Json to_json(const TriangleMesh& mesh);

}  // namespace orbitfit::wire
