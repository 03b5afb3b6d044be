#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "oracles.hpp"
#include "riesz/mesh.hpp"

using namespace riesz;

TEST_CASE("enumerate: unit interval, one level") {
  Mesh m(1, 0, 1, 0);
  auto cubes = enumerateCubes(m, 0);
  REQUIRE(cubes.size() == 3);
  CHECK(cubes[0] == DyadicCube{0, 0, {0, 0}});
  CHECK(cubes[1] == DyadicCube{0, 1, {0, 0}});
  CHECK(cubes[2] == DyadicCube{0, 1, {1, 0}});
}

TEST_CASE("enumerate: one padding level adds the parent") {
  Mesh m(1, 0, 0, 1);
  auto cubes = enumerateCubes(m, 0);
  REQUIRE(cubes.size() == 2);
  CHECK(cubes[0] == DyadicCube{0, -1, {0, 0}});
  CHECK(cubes[1] == DyadicCube{0, 0, {0, 0}});
}

TEST_CASE("enumerate: shifted grid matches the grid formula") {
  Mesh m(1, 0, 1, 0);
  auto cubes = enumerateCubes(m, 1);
  auto ref = oracle::allCubes(m, 1);
  REQUIRE(cubes.size() == ref.size());
  // level 0: [-2/3,1/3), [1/3,4/3); level 1: three half-length cubes
  CHECK(cubes.size() == 5);
  std::set<std::tuple<int, long, long>> a, b;
  for (auto& q : cubes) a.insert({q.level, q.coord[0], q.coord[1]});
  for (auto& q : ref) b.insert({q.level, q.coord[0], q.coord[1]});
  CHECK(a == b);
  for (auto& q : cubes) {
    auto box = m.bounds(q);
    CHECK(m.intersectsBaseBox(box));
  }
  auto lc = lowerCorner(cubes[0], 1);
  CHECK(lc[0] == doctest::Approx(-2.0 / 3.0));
}

TEST_CASE("enumerate: every configuration agrees with a coordinate scan") {
  for (int n : {1, 2})
    for (int J : {0, 1})
      for (int L : {1, 3})
        for (int T : {0, 2}) {
          Mesh m(n, J, L, T);
          for (unsigned t = 0; t < m.shiftCount(); ++t) {
            auto cubes = enumerateCubes(m, t);
            auto ref = oracle::allCubes(m, t);
            REQUIRE(cubes.size() == ref.size());
            for (std::size_t i = 1; i < cubes.size(); ++i)
              CHECK(cubes[i - 1].level <= cubes[i].level);
            for (auto& q : cubes) {
              CHECK(q.level >= -(J + T));
              CHECK(q.level <= L);
            }
          }
        }
}

TEST_CASE("covering cube examples") {
  Mesh m(1, 0, 6, 4);
  auto c = coveringShiftedCube(m, {0.4, 0}, 0.5);
  auto b = m.bounds(c.cube);
  CHECK(b.lo[0] <= std::llround(0.4 * 3 * 64));
  CHECK(c.side <= 3.0);
  CHECK(c.side == 1.0);  // [0,1) of the unshifted grid is the smallest choice

  auto d = coveringShiftedCube(m, {0.0, 0}, 1.0);
  CHECK(d.shift == 0);
  CHECK(d.cube == DyadicCube{0, 0, {0, 0}});
  CHECK(d.side == 1.0);

  auto e = coveringShiftedCube(m, {0.26, 0}, 0.25);
  CHECK(e.side <= 1.5);
  auto lo = lowerCorner(e.cube, 1);
  CHECK(lo[0] <= 0.26);
  CHECK(lo[0] + e.side >= 0.51);
}

TEST_CASE("covering cube property on random cubes") {
  std::mt19937_64 rng(7);
  for (int n : {1, 2}) {
    Mesh m(n, 0, 10, 6);
    for (int it = 0; it < 500; ++it) {
      const double side = std::ldexp(1.0, -static_cast<int>(rng() % 8)) *
                          (0.5 + 0.5 * std::ldexp(double(rng() >> 11), -53));
      std::array<double, 2> lower{0, 0};
      for (int d = 0; d < n; ++d)
        lower[d] = std::ldexp(double(rng() >> 11), -53) * (1.0 - side);
      auto c = coveringShiftedCube(m, lower, side);
      CHECK(c.side <= 6.0 * side);
      auto lc = lowerCorner(c.cube, n);
      for (int d = 0; d < n; ++d) {
        CHECK(lc[d] <= lower[d] + 1e-15);
        CHECK(lc[d] + c.side >= lower[d] + side - 1e-15);
      }
    }
  }
}

TEST_CASE("covering cube fails when the level range is too small") {
  Mesh m(1, 0, 4, 0);
  CHECK_THROWS_AS(coveringShiftedCube(m, {-0.5, 0}, 3.0), std::domain_error);
}

TEST_CASE("cube integrals: small examples") {
  Mesh m(1, 0, 1, 1);
  auto one = StepFunction::constant(m, 1.0);
  DyadicGrid g(m, 0);
  auto half = g.find({0, 1, {0, 0}});
  REQUIRE(half);
  CHECK(cubeIntegral(one, g, *half) == 0.5);
  CHECK(cubeAverage(one, g, *half) == 1.0);
  auto pad = g.find({0, -1, {0, 0}});
  REQUIRE(pad);
  CHECK(cubeIntegral(one, g, *pad) == 1.0);
  CHECK(cubeAverage(one, g, *pad) == 0.5);

  Mesh m3(1, 0, 3, 0);
  std::vector<double> v(8, 0.0);
  for (int i = 0; i < 4; ++i) v[i] = 2.0;
  StepFunction f(m3, v);
  DyadicGrid g3(m3, 0);
  auto root = g3.find({0, 0, {0, 0}});
  CHECK(cubeIntegral(f, g3, *root) == 1.0);
  CHECK(cubeAverage(f, g3, *root) == 1.0);
}

TEST_CASE("partition exactness per level") {
  std::mt19937_64 rng(11);
  for (int n : {1, 2}) {
    Mesh m(n, 1, 3, 1);
    StepFunction f(m, oracle::dyadicCells(m, rng));
    CubeIntegrator integ(f);
    const double total = integ.tickIntegral(m.baseBox());
    for (unsigned t = 0; t < m.shiftCount(); ++t) {
      DyadicGrid g(m, t);
      for (int k = m.coarsestLevel(); k <= m.finestLevel(); ++k) {
        double s = 0.0, sv = 0.0;
        Measure covered = 0;
        for (std::size_t i = g.levelBegin(k); i < g.levelEnd(k); ++i) {
          s += integ.tickIntegral(g.box(i));
          sv += integ.integral(g, i);
          covered += m.measure(intersect(g.box(i), m.baseBox(), n));
        }
        CHECK(s == total);
        if (t == 0) CHECK(sv == integ.total());
        else CHECK(sv == doctest::Approx(integ.total()).epsilon(1e-14));
        CHECK(covered == m.measure(m.baseBox()));
      }
    }
  }
}

TEST_CASE("nesting trichotomy") {
  for (int n : {1, 2}) {
    Mesh m(n, 0, 3, 1);
    for (unsigned t = 0; t < m.shiftCount(); ++t) {
      DyadicGrid g(m, t);
      for (std::size_t i = 0; i < g.size(); ++i)
        for (std::size_t j = 0; j < g.size(); ++j) {
          auto x = intersect(g.box(i), g.box(j), n);
          if (isEmpty(x, n)) {
            CHECK_FALSE(g.contains(i, j));
            continue;
          }
          const Measure mx = m.measure(x);
          const bool smallerI = g.level(i) >= g.level(j);
          CHECK(mx == (smallerI ? g.measure(i) : g.measure(j)));
          if (smallerI) CHECK(g.contains(j, i));
          else CHECK(g.contains(i, j));
        }
    }
  }
}

TEST_CASE("parents are the containing cube one level up") {
  Mesh m(2, 1, 3, 2);
  for (unsigned t = 0; t < m.shiftCount(); ++t) {
    DyadicGrid g(m, t);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (g.parent(i) < 0) {
        CHECK(g.level(i) == m.coarsestLevel());
        continue;
      }
      auto p = static_cast<std::size_t>(g.parent(i));
      CHECK(g.level(p) + 1 == g.level(i));
      CHECK(containsBox(g.box(p), g.box(i), 2));
    }
  }
}

TEST_CASE("prefix sums agree bitwise with naive summation") {
  std::mt19937_64 rng(2024);
  int pairs = 0;
  for (int n : {1, 2}) {
    Mesh m(n, 0, n == 1 ? 6 : 4, 2);
    for (int trial = 0; trial < 10; ++trial) {
      auto v = oracle::dyadicCells(m, rng);
      CubeIntegrator integ(m, v);
      for (unsigned t = 0; t < m.shiftCount(); ++t) {
        DyadicGrid g(m, t);
        for (int q = 0; q < 25; ++q, ++pairs) {
          const std::size_t i = rng() % g.size();
          CHECK(integ.integral(g, i) == oracle::naiveIntegral(m, v, g.cube(i)));
        }
      }
    }
  }
  CHECK(pairs >= 1000);
}

TEST_CASE("prefix sums on general data, relative 1e-13") {
  std::mt19937_64 rng(5);
  for (int n : {1, 2}) {
    Mesh m(n, 0, n == 1 ? 7 : 4, 1);
    auto v = oracle::randomCells(m, rng, 0.0, 10.0);
    CubeIntegrator integ(m, v);
    for (unsigned t = 0; t < m.shiftCount(); ++t) {
      DyadicGrid g(m, t);
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double a = integ.integral(g, i);
        const double b = oracle::naiveIntegral(m, v, g.cube(i));
        CHECK(std::abs(a - b) <= 1e-13 * std::max(1.0, std::abs(b)));
      }
    }
  }
}

TEST_CASE("cell location agrees with containment") {
  Mesh m(2, 0, 3, 1);
  for (unsigned t = 0; t < m.shiftCount(); ++t) {
    DyadicGrid g(m, t);
    for (std::size_t c = 0; c < m.cellCount(); ++c)
      for (int k = m.coarsestLevel(); k <= m.finestLevel(); ++k) {
        auto i = g.locateCell(k, c);
        CHECK(oracle::cubeContainsCell(m, g.cube(i), c));
      }
  }
}

TEST_CASE("step function validation") {
  Mesh m(1, 0, 2, 0);
  CHECK_THROWS(StepFunction(m, {1.0, -1.0, 0.0, 0.0}));
  CHECK_THROWS(StepFunction(m, {1.0, NAN, 0.0, 0.0}));
  CHECK_THROWS(StepFunction(m, {1.0}));
  StepFunction f(m, {0.0, 1.0, 4.0, 9.0});
  auto r = f.power(-0.5);
  CHECK(r[0] == 0.0);
  CHECK(r[2] == 0.5);
  CHECK(f.total() == doctest::Approx(14.0 / 4.0));
}

TEST_CASE("mesh validation") {
  CHECK_THROWS(Mesh(3, 0, 2, 0));
  CHECK_THROWS(Mesh(1, -1, 2, 0));
  CHECK_THROWS(Mesh(2, 0, 12, 0));  // 2^24 cells over the default budget
  CHECK_NOTHROW(Mesh(1, 0, 8, 40));
}
