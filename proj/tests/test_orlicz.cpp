#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "riesz/orlicz.hpp"

using namespace riesz;

namespace {

double uniform(std::mt19937_64& rng) {
  return std::ldexp(static_cast<double>(rng() >> 11), -53);
}

// avg over a cube of f^p, by overlap weights computed cell by cell
double powerAverage(const Mesh& m, const std::vector<double>& v,
                    const DyadicCube& q, double p) {
  std::vector<double> vp(v);
  for (double& x : vp) x = std::pow(x, p);
  return oracle::naiveIntegral(m, vp, q) / std::ldexp(1.0, -m.dim() * q.level);
}

}  // namespace

TEST_CASE("evaluation examples") {
  CHECK(YoungFunction::power(2)(3.0) == doctest::Approx(9.0));
  CHECK(YoungFunction::logBump(2, 1)(0.0) == 0.0);
  // high-precision reference: log(e+1)^2
  CHECK(YoungFunction::logBump(2, 1)(1.0) ==
        doctest::Approx(1.72465625990321035).epsilon(1e-14));
}

TEST_CASE("closed forms are increasing, convex and superlinear") {
  std::vector<YoungFunction> fs{
      YoungFunction::power(1.5),          YoungFunction::logBump(2, 1),
      YoungFunction::logLogBump(2, 1),    YoungFunction::dualLogBump(2, 0.5),
      YoungFunction::dualLogLogBump(2, 0.5), YoungFunction::logBump(4, 0.25),
      YoungFunction::logBump(4.0 / 3.0, 0.5), YoungFunction::dualLogBump(3, 0.5),
      YoungFunction::dualLogBump(1.5, 0.2)};
  for (const auto& phi : fs) CHECK(isYoungOnGrid(phi));
  // only equivalent to a Young function: concave stretch near t in [1, 9]
  CHECK_FALSE(isYoungOnGrid(YoungFunction::dualLogBump(4.0 / 3.0, 1.0 / 6.0)));
  CHECK_FALSE(isYoungOnGrid(YoungFunction::dualLogLogBump(1.5, 0.5)));
}

TEST_CASE("associates") {
  auto a = YoungFunction::power(2).associate();
  for (double t : {0.1, 1.0, 3.0, 50.0})
    CHECK(a(t) == doctest::Approx(t * t / 4.0).epsilon(1e-14));
  // exact associate against the numeric transform
  auto p3 = YoungFunction::power(3);
  auto exact = p3.associate();
  auto num = p3.numericAssociate();
  for (double t : {0.1, 1.0, 10.0, 100.0})
    CHECK(num(t) == doctest::Approx(exact(t)).epsilon(1e-9));
  // double numeric transform recovers Power(3)
  auto twice = YoungFunction::numericLegendre(num);
  for (double t = 0.1; t <= 100.0; t *= 1.5)
    CHECK(std::abs(twice(t) / p3(t) - 1.0) <= 1e-6);
  // log bump associate is equivalent to the dual kind
  auto lb = YoungFunction::logBump(2, 1);
  auto dual = lb.associate();
  CHECK(dual.kind() == YoungKind::DualLogBump);
  CHECK(dual.exponent() == doctest::Approx(2.0));
  CHECK(dual.delta() == doctest::Approx(1.0));
  auto nlb = lb.numericAssociate();
  for (double t = 1.0; t <= 1e6; t *= 3.0) {
    const double r = nlb(t) / dual(t);
    CHECK(r >= 0.25);
    CHECK(r <= 4.0);
  }
  CHECK(dual.associate().kind() == YoungKind::LogBump);
  CHECK(dual.associate().delta() == doctest::Approx(1.0));
}

TEST_CASE("Luxemburg norm examples") {
  Mesh m(1, 0, 3, 0);
  DyadicGrid g(m, 0);
  const std::size_t root = *g.find({0, 0, {0, 0}});
  auto c = StepFunction::constant(m, 3.0);
  CHECK(luxemburgNorm(c, g, root, YoungFunction::power(2.5)) ==
        doctest::Approx(3.0).epsilon(1e-12));
  auto lb = YoungFunction::logBump(2, 1);
  CHECK(luxemburgNorm(c, g, root, lb) ==
        doctest::Approx(3.0 / lb.inverse(1.0)).epsilon(1e-11));

  std::vector<double> v(8, 0.0);
  for (int i = 0; i < 4; ++i) v[i] = 2.0;
  StepFunction f(m, v);
  CHECK(luxemburgNorm(f, g, root, YoungFunction::power(2)) ==
        doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));

  for (int i = 0; i < 4; ++i) v[i] = 1.0;
  StepFunction h(m, v);
  const double lam = luxemburgNorm(h, g, root, lb);
  CHECK(lam == doctest::Approx(0.940537987295517844).epsilon(1e-11));
  // dense lambda scan: the sign change of avg Phi(h/l) - 1 brackets lam
  double prev = 0.5 * lb(1.0 / 0.5) - 1.0;
  double root_scan = 0.0;
  for (double l = 0.5; l <= 2.0; l += 1e-5) {
    const double cur = 0.5 * lb(1.0 / l) - 1.0;
    if (prev > 0.0 && cur <= 0.0) root_scan = l;
    prev = cur;
  }
  CHECK(std::abs(root_scan - lam) <= 1e-5);
  CHECK(luxemburgNorm(StepFunction::zero(m), g, root, lb) == 0.0);
}

TEST_CASE("power case matches the L^p average") {
  std::mt19937_64 rng(41);
  for (int it = 0; it < 100; ++it) {
    const int n = 1 + static_cast<int>(rng() % 2);
    Mesh m(n, 0, n == 1 ? 6 : 3, 1);
    auto v = oracle::randomCells(m, rng, 0.0, 5.0);
    StepFunction f(m, v);
    DyadicGrid g(m, static_cast<unsigned>(rng() % m.shiftCount()));
    const std::size_t i = rng() % g.size();
    const double p = 1.1 + 4.0 * uniform(rng);
    const double expect = std::pow(powerAverage(m, v, g.cube(i), p), 1.0 / p);
    const double got = luxemburgNorm(f, g, i, YoungFunction::power(p));
    if (expect == 0.0) CHECK(got == 0.0);
    else CHECK(std::abs(got / expect - 1.0) <= 1e-10);
  }
}

TEST_CASE("homogeneity and monotonicity") {
  std::mt19937_64 rng(5);
  Mesh m(1, 0, 6, 1);
  std::vector<YoungFunction> fs{YoungFunction::logBump(2, 1),
                                YoungFunction::logLogBump(3, 0.5),
                                YoungFunction::dualLogBump(1.5, 0.2),
                                YoungFunction::power(1.7)};
  for (int it = 0; it < 20; ++it) {
    auto v = oracle::randomCells(m, rng);
    StepFunction f(m, v);
    auto w = v;
    for (double& x : w) x += uniform(rng);
    StepFunction F(m, w);
    DyadicGrid g(m, it % 2);
    const std::size_t i = rng() % g.size();
    for (const auto& phi : fs) {
      const double base = luxemburgNorm(f, g, i, phi);
      for (double c : {0.5, 2.0, 10.0}) {
        const double sc = luxemburgNorm(f.scaled(c), g, i, phi);
        CHECK(std::abs(sc - c * base) <= 1e-10 * c * base);
      }
      CHECK(base <= luxemburgNorm(F, g, i, phi) * (1.0 + 1e-12));
    }
    // ||f||_q <= ||f||_Phi when Phi(t) >= t^q
    const double nq = luxemburgNorm(f, g, i, YoungFunction::power(2));
    const double nb = luxemburgNorm(f, g, i, YoungFunction::logBump(2, 0.5));
    CHECK(nq <= nb * (1.0 + 1e-12));
  }
}

TEST_CASE("numeric table kind") {
  std::vector<double> t, phi;
  for (double x = 0.01; x <= 1000.0; x *= 1.1) {
    t.push_back(x);
    phi.push_back(x * x);
  }
  auto tab = YoungFunction::numericTable(t, phi);
  CHECK(tab(3.0) == doctest::Approx(9.0).epsilon(1e-12));
  CHECK(tab(1e4) == doctest::Approx(1e8).epsilon(1e-9));
  CHECK_THROWS(YoungFunction::numericTable({1, 2, 3}, {1, 1.5, 1.8}));
  auto v = bpCheck(tab, 2.0);
  CHECK(v.unreliable);
  CHECK_FALSE(v.finite);
}

TEST_CASE("B_p verdicts") {
  for (double p : {1.5, 2.0, 4.0}) {
    CHECK_FALSE(bpCheck(YoungFunction::power(p), p).finite);
    CHECK(bpCheck(YoungFunction::dualLogBump(p, 0.3), p).finite);
    CHECK_FALSE(bpCheck(YoungFunction::logBump(p, 0.3), p).finite);
    CHECK(bpCheck(YoungFunction::power(p), p + 0.5).finite);
  }
  // the associate of the half bump: dual exponent q', parameter delta/(2(q-1))
  for (double q : {1.5, 2.0, 4.0})
    for (double delta : {0.5, 1.0}) {
      const double qp = q / (q - 1.0);
      CHECK(bpCheck(YoungFunction::dualLogBump(qp, delta / (2 * (q - 1))), qp)
                .finite);
      CHECK(bpCheck(YoungFunction::dualLogLogBump(qp, delta / (2 * (q - 1))), qp)
                .finite);
      CHECK(bpCheck(YoungFunction::logBump(q, delta / 2).associate(), qp)
                .finite);
    }
  auto v = bpCheck(YoungFunction::power(2), 2.0);
  CHECK(v.tailSlope == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(v.integralToCutoff == doctest::Approx(std::log(1e12)).epsilon(1e-8));
}

TEST_CASE("Orlicz maximal function") {
  Mesh m(1, 0, 4, 1);
  auto one = StepFunction::constant(m, 1.0);
  for (double p : {1.0, 2.0, 3.0}) {
    auto M = orliczMaximal(one, YoungFunction::power(p));
    for (std::size_t c = 0; c < m.cellCount(); ++c)
      CHECK(M[c] == doctest::Approx(1.0).epsilon(1e-11));
  }
  CHECK(orliczMaximal(StepFunction::zero(m), YoungFunction::logBump(2, 1))
            .isZero());

  std::vector<double> v(m.cellCount(), 0.0);
  for (std::size_t c = 0; c < m.cellCount() / 2; ++c) v[c] = 1.0;
  StepFunction f(m, v);
  auto M1 = orliczMaximal(f, YoungFunction::power(1));
  auto brute = oracle::naiveMaximal(m, v);
  for (std::size_t c = 0; c < m.cellCount(); ++c)
    CHECK(M1[c] == doctest::Approx(brute[c]).epsilon(1e-10));
  CHECK(M1[13] >= 0.5 - 1e-12);  // x in [3/4,1)

  auto a = orliczMaximal(f, YoungFunction::logBump(2, 1), kernels::Exec::Serial);
  auto b = orliczMaximal(f, YoungFunction::logBump(2, 1), kernels::Exec::Parallel);
  for (std::size_t c = 0; c < m.cellCount(); ++c) CHECK(a[c] == b[c]);
}

TEST_CASE("generalized Holder") {
  Mesh m(1, 0, 3, 0);
  DyadicGrid g(m, 0);
  const std::size_t root = *g.find({0, 0, {0, 0}});
  auto one = StepFunction::constant(m, 1.0);
  auto h = generalizedHolder(one, one, g, root, YoungFunction::power(2));
  CHECK(h.lhs == doctest::Approx(1.0));
  CHECK(h.rhs == doctest::Approx(2.0).epsilon(1e-11));
  std::vector<double> v(8, 0.0);
  for (int i = 0; i < 4; ++i) v[i] = 1.0;
  StepFunction half(m, v);
  auto k = generalizedHolder(half, half, g, root, YoungFunction::power(2));
  CHECK(k.lhs == doctest::Approx(0.5));
  CHECK(k.rhs == doctest::Approx(1.0).epsilon(1e-11));

  std::mt19937_64 rng(77);
  Mesh m6(1, 0, 6, 0);
  std::vector<YoungFunction> fs{YoungFunction::power(2),
                                YoungFunction::power(1.3),
                                YoungFunction::logBump(2, 1),
                                YoungFunction::dualLogBump(3, 0.5)};
  for (int it = 0; it < 60; ++it) {
    StepFunction f(m6, oracle::randomCells(m6, rng, 0.0, 3.0));
    StepFunction gg(m6, oracle::randomCells(m6, rng, 0.0, 3.0));
    DyadicGrid grid(m6, it % 2);
    const std::size_t i = rng() % grid.size();
    const auto r = generalizedHolder(f, gg, grid, i, fs[it % fs.size()]);
    CHECK(r.lhs <= r.rhs);
  }
}

TEST_CASE("norm gap fit") {
  Mesh m(1, 0, 4, 0);
  auto corpus = CubeCorpus::insideBox(m);
  auto fit = crvGapCheck(StepFunction::constant(m, 1.0), 2.0, 1.0, corpus);
  CHECK(fit.feasible);
  CHECK(fit.parameter == doctest::Approx(0.99));
  // all three norms are multiples of the constant; the ratio n0/nPhi <= 1
  for (const auto& t : fit.triples) {
    CHECK(t.nq == doctest::Approx(1.0).epsilon(1e-11));
    CHECK(t.n0 <= t.nPhi);
  }

  std::vector<double> v(m.cellCount(), 1.0);
  for (std::size_t c = 0; c < m.cellCount() / 2; ++c) v[c] = 4.0;
  auto two = crvGapCheck(StepFunction(m, v), 2.0, 1.0, corpus);
  CHECK(two.feasible);
  CHECK(two.constant <= 16.0);
  auto ll = crvGapCheck(StepFunction(m, v), 2.0, 1.0, corpus, GapMode::LogLog);
  CHECK(ll.feasible);

  auto zero = crvGapCheck(StepFunction::zero(m), 2.0, 1.0, corpus);
  CHECK(zero.triples.empty());
  CHECK(zero.skipped == corpus.size());
  CHECK_FALSE(zero.feasible);
}

TEST_CASE("spec strings") {
  auto y = YoungFunction::parse("log:p=2,delta=1");
  CHECK(y.kind() == YoungKind::LogBump);
  CHECK(YoungFunction::parse(y.describe()).describe() == y.describe());
  CHECK_THROWS(YoungFunction::parse("cubic:p=2"));
  CHECK_THROWS(YoungFunction::parse("power:q=2"));
}
