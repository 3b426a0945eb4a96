#pragma once

#include "cubeshuffle/geometry.hpp"

#include <json.hpp>

namespace cubeshuffle {

using Json = nlohmann::json;

/// Rationals travel as "p/q" strings; integers are accepted on input.
Json to_json(const Rational& r);
Rational rational_from_json(const Json& j);

/// Cubes travel as arrays of [lo, hi] pairs.
Json to_json(const Cube& c);
Cube cube_from_json(const Json& j);

Json to_json(const Point& p);
Point point_from_json(const Json& j);

}  // namespace cubeshuffle
