#pragma once

#include <json.hpp>

#include "riesz/mesh.hpp"
#include "riesz/sparse.hpp"
#include "riesz/weights.hpp"

namespace riesz {

using Json = nlohmann::ordered_json;

/// Finite doubles as numbers; +-inf and NaN as the strings "inf", "-inf",
/// "nan" so that verdicts survive a round trip.
Json number(double x);
double numberFrom(const Json& j);

Json toJson(const Mesh& m);
Mesh meshFromJson(const Json& j);

/// [shiftIndex, level, coord0, (coord1)]
Json toJson(const DyadicCube& q, int n);
DyadicCube cubeFromJson(const Json& j, int n);

Json toJson(const ExponentTuple& e);

/// {"mesh", "shift", "cubes": [[shift, level, ...], ...]}
Json toJson(const SparseFamily& s);
SparseFamily familyFromJson(const Json& j);

Json toJson(const SparseCertificate& c, const SparseFamily& s);
Json toJson(const CoronaDecomposition& cd);
Json toJson(const CharacteristicReport& r, int n);

}  // namespace riesz
