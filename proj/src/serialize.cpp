#include "riesz/serialize.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace riesz {

Json number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

double numberFrom(const Json& j) {
  if (j.is_number()) return j.get<double>();
  const auto s = j.get<std::string>();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  throw std::invalid_argument("not a number: " + s);
}

Json toJson(const Mesh& m) {
  return Json{{"n", m.dim()},
              {"J", m.baseExponent()},
              {"L", m.finestExponent()},
              {"T", m.coarsePadding()}};
}

Mesh meshFromJson(const Json& j) {
  return Mesh(j.at("n").get<int>(), j.at("J").get<int>(), j.at("L").get<int>(),
              j.at("T").get<int>());
}

Json toJson(const DyadicCube& q, int n) {
  Json a = Json::array({q.shift, q.level, q.coord[0]});
  if (n == 2) a.push_back(q.coord[1]);
  return a;
}

DyadicCube cubeFromJson(const Json& j, int n) {
  if (!j.is_array() || j.size() != static_cast<std::size_t>(2 + n))
    throw std::invalid_argument("cube must be [shift, level, coords...]");
  DyadicCube q;
  q.shift = j[0].get<unsigned>();
  q.level = j[1].get<int>();
  for (int d = 0; d < n; ++d) q.coord[d] = j[2 + d].get<std::int64_t>();
  return q;
}

Json toJson(const ExponentTuple& e) {
  return Json{{"n", e.n()}, {"alpha", e.alpha()}, {"p", e.p()}, {"q", e.q()}};
}

Json toJson(const SparseFamily& s) {
  const int n = s.mesh().dim();
  Json cubes = Json::array();
  for (std::size_t q : s.members()) cubes.push_back(toJson(s.grid().cube(q), n));
  return Json{{"mesh", toJson(s.mesh())}, {"shift", s.shift()}, {"cubes", cubes}};
}

SparseFamily familyFromJson(const Json& j) {
  const Mesh m = meshFromJson(j.at("mesh"));
  std::vector<DyadicCube> cubes;
  for (const Json& c : j.at("cubes")) cubes.push_back(cubeFromJson(c, m.dim()));
  return SparseFamily::fromCubes(m, j.at("shift").get<unsigned>(), cubes);
}

Json toJson(const SparseCertificate& c, const SparseFamily& s) {
  const int n = s.mesh().dim();
  Json j{{"sparse", c.sparse}, {"disjoint", c.disjoint},
         {"worstRatio", number(c.worstRatio)}};
  j["worstCube"] = c.worstCube ? toJson(s.grid().cube(*c.worstCube), n) : Json();
  j["violation"] = c.violation ? toJson(s.grid().cube(*c.violation), n) : Json();
  return j;
}

Json toJson(const CoronaDecomposition& cd) {
  const DyadicGrid& g = *cd.grid;
  const int n = g.mesh().dim();
  Json cubes = Json::array();
  for (const CoronaCube& c : cd.cubes) {
    Json e{{"cube", toJson(g.cube(c.cube), n)},
           {"a", c.a},
           {"b", c.b},
           {"stop", toJson(g.cube(c.stop), n)},
           {"stopping", c.stopping}};
    if (c.stopping) e["generation"] = c.generation;
    e["slice"] = number(c.slice);
    e["frac"] = number(c.frac);
    cubes.push_back(std::move(e));
  }
  Json unassigned = Json::array();
  for (std::size_t q : cd.unassigned) unassigned.push_back(toJson(g.cube(q), n));
  return Json{{"root", toJson(g.cube(cd.root), n)},
              {"mode", cd.mode == SliceMode::Sobolev ? "sobolev" : "fractional"},
              {"exponents", {{"n", cd.n}, {"alpha", cd.alpha}, {"p", cd.p}, {"q", cd.q}}},
              {"slices", cd.slices},
              {"gamma", number(cd.gamma)},
              {"cubes", cubes},
              {"unassigned", unassigned}};
}

Json toJson(const CharacteristicReport& r, int n) {
  Json j{{"name", r.name}, {"value", number(r.value)}};
  j["witness"] = r.witnessCube ? toJson(*r.witnessCube, n) : Json();
  j["corpusSize"] = r.corpusSize;
  j["skipped"] = r.skipped;
  return j;
}

}  // namespace riesz
