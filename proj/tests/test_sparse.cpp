#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "oracles.hpp"
#include "riesz/sparse.hpp"

using namespace riesz;

namespace {

bool cubeInside(const Mesh& m, const DyadicCube& outer, const DyadicCube& inner) {
  if (outer.level > inner.level) return false;
  for (int d = 0; d < m.dim(); ++d) {
    auto [a0, a1] = oracle::axisTicks(m, outer, d);
    auto [b0, b1] = oracle::axisTicks(m, inner, d);
    if (b0 < a0 || b1 > a1) return false;
  }
  return true;
}

double naiveAvg(const Mesh& m, const std::vector<double>& v, const DyadicCube& q) {
  return oracle::naiveIntegral(m, v, q) / std::ldexp(1.0, -m.dim() * q.level);
}

// The family straight from its definition: for each k, the enumerated cubes
// with average > a^k having no enumerated strict ancestor with average > a^k.
std::set<std::pair<int, std::array<std::int64_t, 2>>> bruteSparse(
    const Mesh& m, const std::vector<double>& f, unsigned shift) {
  const auto cubes = oracle::allCubes(m, shift);
  std::vector<double> avg;
  for (const auto& q : cubes) avg.push_back(naiveAvg(m, f, q));
  const int e = m.dim() + 1;
  std::set<std::pair<int, std::array<std::int64_t, 2>>> out;
  for (int k = -60; k <= 20; ++k) {
    const double ak = std::ldexp(1.0, e * k);
    for (std::size_t i = 0; i < cubes.size(); ++i) {
      if (!(avg[i] > ak)) continue;
      bool maximal = true;
      for (std::size_t j = 0; j < cubes.size() && maximal; ++j)
        if (j != i && avg[j] > ak && cubeInside(m, cubes[j], cubes[i]))
          maximal = false;
      if (maximal) out.insert({cubes[i].level, cubes[i].coord});
    }
  }
  return out;
}

std::vector<double> spikyCells(const Mesh& m, std::mt19937_64& rng) {
  auto v = oracle::randomCells(m, rng);
  for (double& x : v) x = x < 0.3 ? 0.0 : std::exp(8.0 * (x - 0.6));
  return v;
}

// measure of {count > k} by counting members over every tick cell of R0
Measure bruteOverlap(const SparseFamily& s, std::size_t root, int k) {
  const DyadicGrid& g = s.grid();
  const Mesh& m = g.mesh();
  const TickBox r = g.box(root);
  Measure out = 0;
  const int n = m.dim();
  for (std::int64_t i = r.lo[0]; i < r.hi[0]; ++i)
    for (std::int64_t j = (n == 2 ? r.lo[1] : 0); j < (n == 2 ? r.hi[1] : 1); ++j) {
      int count = 0;
      for (std::size_t q : s.members()) {
        if (!g.contains(root, q)) continue;
        const TickBox& b = g.box(q);
        if (i >= b.lo[0] && i < b.hi[0] &&
            (n == 1 || (j >= b.lo[1] && j < b.hi[1])))
          ++count;
      }
      if (count > k) ++out;
    }
  return out;
}

SparseFamily halvingChain(const Mesh& m, int levels) {
  std::vector<DyadicCube> c;
  for (int j = 0; j < levels; ++j) c.push_back({0, j, {0, 0}});
  return SparseFamily::fromCubes(m, 0, c);
}

std::size_t unitCube(const DyadicGrid& g) { return *g.find({0, 0, {0, 0}}); }

}  // namespace

TEST_CASE("buildSparse: constant function on a bare grid is the root") {
  Mesh m(1, 0, 4, 0);
  auto b = buildSparse(StepFunction::constant(m, 1.0), 0);
  REQUIRE(b.family.size() == 1);
  CHECK(b.family.grid().cube(b.family.members()[0]) == DyadicCube{0, 0, {0, 0}});
  CHECK(b.topSlice[0] == -1);
  CHECK_THROWS_AS(buildSparse(StepFunction::zero(m), 0), std::invalid_argument);
}

TEST_CASE("buildSparse: domination constant on the constant function") {
  Mesh m(1, 0, 6, 0);
  const auto f = StepFunction::constant(m, 1.0);
  auto b = buildSparse(f, 0);
  CHECK(sparseDominationConstant(1, 0.5) ==
        doctest::Approx(4.0 / (1.0 - std::sqrt(0.5))).epsilon(1e-15));
  const auto d = checkDomination(f, 0.5, b.family);
  CHECK(d.violations == 0);
  // sum_j 2^{-j/2} against the constant times 1
  const auto dr = dyadicRiesz(f, 0.5, 0);
  for (double x : dr.values()) CHECK(x < 1.0 / (1.0 - std::sqrt(0.5)));
}

TEST_CASE("buildSparse: spike gives an ancestor chain and a certificate") {
  Mesh m(1, 0, 7, 4);
  std::vector<double> v(m.cellCount(), 0.0);
  v[37] = 1.0;
  const StepFunction f(m, v);
  for (unsigned t = 0; t < 2; ++t) {
    auto b = buildSparse(f, t);
    const DyadicGrid& g = b.family.grid();
    const std::size_t cellCube = g.locateCell(m.finestLevel(), 37);
    for (std::size_t q : b.family.members()) CHECK(g.contains(q, cellCube));
    for (std::size_t s = 1; s < b.family.size(); ++s)
      CHECK(b.family.treeParent(s) == static_cast<std::ptrdiff_t>(s - 1));
    CHECK(verifySparse(b.family).ok());
    CHECK(checkDomination(f, 0.5, b.family).violations == 0);
  }
}

TEST_CASE("buildSparse agrees with the brute-force definition") {
  std::mt19937_64 rng(11);
  for (int n = 1; n <= 2; ++n) {
    Mesh m(n, 0, n == 1 ? 5 : 2, 3);
    for (int trial = 0; trial < 4; ++trial) {
      const auto v = spikyCells(m, rng);
      if (std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; })) continue;
      const StepFunction f(m, v);
      for (unsigned t = 0; t < m.shiftCount(); ++t) {
        auto b = buildSparse(f, t);
        std::set<std::pair<int, std::array<std::int64_t, 2>>> got;
        for (std::size_t q : b.family.members())
          got.insert({b.family.grid().cube(q).level, b.family.grid().cube(q).coord});
        CHECK(got == bruteSparse(m, v, t));
      }
    }
  }
}

TEST_CASE("buildSparse: certified and dominating on random data") {
  std::mt19937_64 rng(5);
  for (int n = 1; n <= 2; ++n) {
    Mesh m(n, 0, n == 1 ? 8 : 4, 4);
    for (int trial = 0; trial < 6; ++trial) {
      const StepFunction f(m, trial % 2 ? spikyCells(m, rng) : oracle::randomCells(m, rng));
      if (f.isZero()) continue;
      for (unsigned t = 0; t < m.shiftCount(); ++t) {
        auto b = buildSparse(f, t);
        const auto cert = verifySparse(b.family);
        CHECK(cert.ok());
        CHECK(cert.worstRatio <= 0.5);
        for (double alpha : {0.25, 0.5, 0.75}) {
          const auto d = checkDomination(f, alpha, b.family);
          CHECK(d.violations == 0);
          CHECK(d.worstRatio <= 1.0);
        }
      }
    }
  }
}

TEST_CASE("buildSparse: serial and parallel agree") {
  std::mt19937_64 rng(2);
  Mesh m(2, 0, 5, 3);
  const StepFunction f(m, spikyCells(m, rng));
  auto a = buildSparse(f, 1, Exec::Serial);
  auto b = buildSparse(f, 1, Exec::Parallel);
  CHECK(std::vector<std::size_t>(a.family.members().begin(), a.family.members().end()) ==
        std::vector<std::size_t>(b.family.members().begin(), b.family.members().end()));
  CHECK(a.topSlice == b.topSlice);
}

TEST_CASE("buildSparse: coarsest cubes can break sparsity without padding") {
  // f = 4.1 on [0, 3/4): the root has average 3.075 and nothing above it, so
  // it enters at k = 0 while [0,1/2) and [1/2,3/4) enter at k = 1.
  Mesh m(1, 0, 2, 0);
  const StepFunction f(m, {4.1, 4.1, 4.1, 0.0});
  auto b = buildSparse(f, 0);
  const auto cert = verifySparse(b.family);
  CHECK_FALSE(cert.sparse);
  CHECK(cert.worstRatio == 0.75);
  CHECK(cert.violation == unitCube(b.family.grid()));
  // with room above the base box the same data is sparse
  Mesh padded(1, 0, 2, 3);
  CHECK(verifySparse(buildSparse(StepFunction(padded, {4.1, 4.1, 4.1, 0.0}), 0).family).ok());
}

TEST_CASE("verifySparse: fixtures") {
  Mesh m(1, 0, 6, 0);
  auto chain = halvingChain(m, 7);
  auto c = verifySparse(chain);
  CHECK(c.ok());
  CHECK(c.worstRatio == 0.5);
  // E(Q) = Q minus its child: half of Q, except the last link
  const Measure top = chain.grid().measure(chain.members()[0]);
  CHECK(c.eMeasure[0] * 2 == top);

  std::vector<DyadicCube> full;
  for (int k = 0; k <= 2; ++k)
    for (std::int64_t i = 0; i < (1 << k); ++i) full.push_back({0, k, {i, 0}});
  auto bad = verifySparse(SparseFamily::fromCubes(m, 0, full));
  CHECK_FALSE(bad.sparse);
  CHECK(bad.worstRatio == 1.0);
  CHECK(bad.violation == unitCube(chain.grid()));
}

TEST_CASE("overlapLevelSet: fixtures") {
  Mesh m(1, 0, 13, 0);
  auto chain = halvingChain(m, 13);
  const std::size_t root = unitCube(chain.grid());
  for (int k = 1; k <= 12; ++k) {
    const auto ls = overlapLevelSet(chain, root, k);
    CHECK(ls.withinBound(k));
    CHECK(ls.measure * (Measure{1} << k) == ls.rootMeasure);  // attained
    CHECK(ls.ratio() == std::ldexp(1.0, -k));
  }
  CHECK(overlapLevelSet(chain, root, 2).ratio() == 0.25);
  CHECK(overlapLevelSet(chain, root, 12).generations.size() == 13);
  CHECK_THROWS(overlapLevelSet(chain, root, 0));

  auto single = SparseFamily::fromCubes(m, 0, std::vector<DyadicCube>{{0, 0, {0, 0}}});
  CHECK(overlapLevelSet(single, root, 1).measure == 0);
}

TEST_CASE("overlapLevelSet: exact bound and brute-force count on built families") {
  std::mt19937_64 rng(17);
  for (int n = 1; n <= 2; ++n) {
    Mesh m(n, 0, n == 1 ? 7 : 3, 3);
    for (int trial = 0; trial < 3; ++trial) {
      const StepFunction f(m, spikyCells(m, rng));
      if (f.isZero()) continue;
      for (unsigned t = 0; t < m.shiftCount(); ++t) {
        auto s = buildSparse(f, t).family;
        for (std::size_t root : s.members()) {
          for (int k = 1; k <= 12; ++k) {
            const auto ls = overlapLevelSet(s, root, k);
            CHECK(ls.withinBound(k));
            if (k <= 3) CHECK(ls.measure == bruteOverlap(s, root, k));
          }
        }
      }
    }
  }
}

// --- corona -----------------------------------------------------------------

TEST_CASE("corona: constant weights on the halving chain") {
  Mesh m(1, 0, 8, 0);
  const auto one = StepFunction::constant(m, 1.0);
  auto chain = halvingChain(m, 9);
  const std::size_t R = unitCube(chain.grid());
  const ExponentTuple e(1, 0.5, 4.0 / 3.0, 4.0);
  const auto cd = coronaDecompose(chain, R, one, one, e);
  CHECK(cd.slices == std::vector<int>{-1});
  CHECK(cd.gamma == 0.0);
  REQUIRE(cd.stopping(-1).size() == 1);
  CHECK(cd.cubes[cd.stopping(-1)[0]].cube == R);
  for (const auto& c : cd.cubes) {
    CHECK(c.stop == R);
    // F(Q_j)/F(R) = 2^{-j/2}
    const int j = chain.grid().cube(c.cube).level;
    CHECK(c.b == j / 2 + 1);
  }
  for (int b : cd.bValues(-1, R)) {
    CHECK(cd.governed(-1, R, b).size() <= 2);
    for (int k = 2; k <= 6; ++k) CHECK(levelSetCubes(cd, -1, R, b, k).empty());
  }
  CHECK(certifyCorona(cd, chain, one, one).ok());
  const auto decay = sigmaDecayCheck(cd, one);
  CHECK(decay.asserted);
  CHECK(decay.ok);
  for (const auto& r : decay.rows)
    if (r.k >= 2) CHECK(r.ratio == 0.0);
}

TEST_CASE("corona: single cube") {
  Mesh m(1, 0, 4, 0);
  const auto one = StepFunction::constant(m, 1.0);
  auto s = SparseFamily::fromCubes(m, 0, std::vector<DyadicCube>{{0, 0, {0, 0}}});
  const ExponentTuple e(1, 0.5, 4.0 / 3.0, 4.0);
  const auto cd = coronaDecompose(s, 0, one, one, e);
  REQUIRE(cd.cubes.size() == 1);
  CHECK(cd.cubes[0].stopping);
  CHECK(cd.cubes[0].generation == 0);
  CHECK(cd.slices.size() == 1);
  const auto decay = sigmaDecayCheck(cd, one);
  for (const auto& r : decay.rows) CHECK(r.ratio == (r.k == 0 ? 1.0 : 0.0));
}

TEST_CASE("corona: random instances certify, corrupted ones do not") {
  std::mt19937_64 rng(23);
  for (int n = 1; n <= 2; ++n) {
    Mesh m(n, 0, n == 1 ? 8 : 4, 3);
    const ExponentTuple e = ExponentTuple::sobolev(n, 0.5, 1.5);
    for (int trial = 0; trial < 5; ++trial) {
      const StepFunction f(m, spikyCells(m, rng));
      if (f.isZero()) continue;
      const StepFunction u(m, spikyCells(m, rng));
      const StepFunction sigma(m, oracle::randomCells(m, rng, 0.1, 3.0));
      const unsigned t = trial % m.shiftCount();
      auto s = buildSparse(f, t).family;
      const std::size_t R = s.members()[0];
      for (SliceMode mode : {SliceMode::Sobolev, SliceMode::Fractional}) {
        auto cd = coronaDecompose(s, R, u, sigma, e, mode);
        const auto cert = certifyCorona(cd, s, u, sigma);
        CHECK(cert.ok());
        CHECK(cd.cubes.size() + cd.unassigned.size() == s.within(R).size());
        for (const auto& c : cd.cubes) {
          CHECK(std::ldexp(1.0, c.a) < c.slice);
          CHECK(c.slice <= std::ldexp(1.0, c.a + 1));
          CHECK(c.a <= cd.gamma);
        }
        // partition of each Q^a(P) by b
        for (int a : cd.slices)
          for (std::size_t sp : cd.stopping(a)) {
            const std::size_t P = cd.cubes[sp].cube;
            std::size_t total = 0;
            for (int b : cd.bValues(a, P)) total += cd.governed(a, P, b).size();
            CHECK(total == cd.governed(a, P).size());
          }

        for (std::size_t i = 0; i < cd.cubes.size(); ++i) {
          if (cd.cubes[i].stopping) continue;
          auto bad = cd;
          bad.cubes[i].b += 1;
          CHECK_FALSE(certifyCorona(bad, s, u, sigma).bSlices);
          bad = cd;
          bad.cubes[i].a += 1;
          CHECK_FALSE(certifyCorona(bad, s, u, sigma).ok());
          break;
        }
        if (!cd.unassigned.empty()) {
          auto bad = cd;
          bad.unassigned.pop_back();
          CHECK_FALSE(certifyCorona(bad, s, u, sigma).partition);
        }
      }
    }
  }
}

TEST_CASE("corona: sigma decay within the provable envelope") {
  std::mt19937_64 rng(31);
  Mesh m(1, 0, 9, 3);
  const ExponentTuple e = ExponentTuple::sobolev(1, 0.25, 1.5);
  for (int trial = 0; trial < 4; ++trial) {
    const StepFunction f(m, spikyCells(m, rng));
    if (f.isZero()) continue;
    const StepFunction u = generateWeight(m, "martingale:seed=" + std::to_string(trial) + ",vol=0.4");
    const StepFunction sigma = u.power(-2.0);  // u^{1 - p'}
    auto s = buildSparse(f, 0).family;
    auto cd = coronaDecompose(s, s.members()[0], u, sigma, e);
    const auto decay = sigmaDecayCheck(cd, sigma);
    CHECK(decay.gamma == doctest::Approx(1.0 + 0.25 * 3.0 / e.q()));
    CHECK(decay.asserted);
    CHECK(decay.ok);
    for (const auto& r : decay.rows) CHECK(r.ratio <= 1.0 + 1e-12);
  }
}

// --- Carleson ---------------------------------------------------------------

TEST_CASE("Carleson: antichain and brute force") {
  Mesh m(1, 0, 5, 1);
  DyadicGrid g(m, 0);
  const auto mu = StepFunction::constant(m, 1.0);
  std::vector<std::pair<std::size_t, double>> c;
  for (std::int64_t i = 0; i < 4; ++i) {
    const std::size_t q = *g.find({0, 2, {i, 0}});
    c.emplace_back(q, g.volume(q));
  }
  auto r = carlesonConstant(g, c, mu);
  CHECK(r.constant == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_FALSE(r.infinite);

  std::mt19937_64 rng(3);
  const StepFunction w(m, oracle::randomCells(m, rng, 0.0, 2.0));
  std::vector<std::pair<std::size_t, double>> rc;
  for (std::size_t q = 0; q < g.size(); q += 3) rc.emplace_back(q, std::ldexp(1.0, -(int)(q % 5)));
  double brute = 0.0;
  const auto all = oracle::allCubes(m, 0);
  for (const auto& R : all) {
    double sum = 0.0;
    for (const auto& [q, v] : rc)
      if (cubeInside(m, R, g.cube(q))) sum += v;
    const double wr = oracle::naiveIntegral(m, {w.values().begin(), w.values().end()}, R);
    if (sum > 0.0) brute = std::max(brute, sum / wr);
  }
  CHECK(carlesonConstant(g, rc, w).constant == doctest::Approx(brute).epsilon(1e-12));

  // mass on a null cube
  std::vector<double> z(m.cellCount(), 1.0);
  z[0] = 0.0;
  const std::size_t cell0 = g.locateCell(m.finestLevel(), 0);
  std::vector<std::pair<std::size_t, double>> one{{cell0, 1.0}};
  CHECK(carlesonConstant(g, one, StepFunction(m, z)).infinite);
}

TEST_CASE("Carleson embedding: lhs <= rhs") {
  Mesh m(1, 0, 6, 1);
  std::mt19937_64 rng(8);
  for (unsigned t = 0; t < 2; ++t) {
    DyadicGrid g(m, t);
    const auto one = StepFunction::constant(m, 1.0);
    std::vector<std::pair<std::size_t, double>> c;
    for (int j = 0; j <= 6; ++j) {
      const std::size_t q = g.indexAt(j, {1, 0});
      c.emplace_back(q, g.volume(q));
    }
    auto e1 = carlesonEmbedding(g, c, one, one, 0.5, 4.0);
    CHECK(e1.lhs > 0.0);
    CHECK(e1.lhs <= e1.rhs);

    const StepFunction mu(m, oracle::randomCells(m, rng, 0.2, 2.0));
    const StepFunction f(m, oracle::randomCells(m, rng));
    std::vector<std::pair<std::size_t, double>> rc;
    for (std::size_t q = 0; q < g.size(); ++q) rc.emplace_back(q, 0.1 * rng() / 1.8e19);
    auto e2 = carlesonEmbedding(g, rc, mu, f, 0.25, 3.0);
    CHECK(e2.lhs <= e2.rhs);
  }
}

TEST_CASE("Carleson: corona stopping cubes within twice Fujii-Wilson") {
  std::mt19937_64 rng(41);
  for (int n = 1; n <= 2; ++n) {
    Mesh m(n, 0, n == 1 ? 7 : 3, 3);
    const ExponentTuple e = ExponentTuple::sobolev(n, 0.5, 1.5);
    for (int trial = 0; trial < 3; ++trial) {
      const StepFunction f(m, spikyCells(m, rng));
      if (f.isZero()) continue;
      const StepFunction u(m, spikyCells(m, rng));
      const StepFunction sigma = StepFunction::constant(m, 1.0);
      auto s = buildSparse(f, trial % m.shiftCount()).family;
      auto cd = coronaDecompose(s, s.members()[0], u, sigma, e);
      for (const auto& row : coronaCarleson(cd, u)) {
        CHECK(row.A >= 1.0);
        CHECK(row.worstRatio <= 1.0 + 1e-12);
      }
    }
  }
}
