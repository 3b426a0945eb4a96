#include "cubeshuffle/json_codec.hpp"

namespace cubeshuffle {

Json to_json(const Rational& r) { return r.str(); }

Rational rational_from_json(const Json& j) {
  if (j.is_string()) return Rational::parse(j.get<std::string>());
  if (j.is_number_integer()) return Rational(j.get<long>());
  throw std::invalid_argument("expected rational \"p/q\", got " + j.dump());
}

Json to_json(const Cube& c) {
  Json out = Json::array();
  for (const auto& a : c.axes()) out.push_back(Json::array({to_json(a.lo()), to_json(a.hi())}));
  return out;
}

Cube cube_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) throw std::invalid_argument("expected cube as array of [lo, hi] pairs");
  std::vector<Interval> axes;
  for (const auto& pair : j) {
    if (!pair.is_array() || pair.size() != 2) throw std::invalid_argument("cube axis must be [lo, hi]");
    axes.emplace_back(rational_from_json(pair[0]), rational_from_json(pair[1]));
  }
  return Cube(std::move(axes));
}

Json to_json(const Point& p) {
  Json out = Json::array();
  for (const auto& x : p) out.push_back(to_json(x));
  return out;
}

Point point_from_json(const Json& j) {
  if (!j.is_array()) throw std::invalid_argument("expected point as array of rationals");
  Point p;
  for (const auto& x : j) p.push_back(rational_from_json(x));
  return p;
}

}  // namespace cubeshuffle
