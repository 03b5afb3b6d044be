#include "riesz/normest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>

#include "riesz/serialize.hpp"

namespace riesz {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// (int |f|^p w)^{1/p}
double normOf(std::span<const double> f, const StepFunction& w, double p) {
  double acc = 0.0;
  for (std::size_t c = 0; c < f.size(); ++c)
    if (w[c] > 0.0 && f[c] > 0.0) acc += std::pow(f[c], p) * w[c];
  return std::pow(acc * w.mesh().cellVolume(), 1.0 / p);
}

// x^e on the support of w, 0 elsewhere
std::vector<double> powerOn(std::span<const double> x, const StepFunction& w,
                            double e) {
  std::vector<double> out(x.size(), 0.0);
  for (std::size_t c = 0; c < x.size(); ++c)
    if (w[c] > 0.0 && x[c] > 0.0) out[c] = std::pow(x[c], e);
  return out;
}

std::vector<double> normalized(std::vector<double> f, const StepFunction& w,
                               double p) {
  const double nrm = normOf(f, w, p);
  if (nrm > 0.0)
    for (double& x : f) x /= nrm;
  return f;
}

StepFunction times(const std::vector<double>& f, const StepFunction& w) {
  std::vector<double> v(f.size());
  for (std::size_t c = 0; c < f.size(); ++c) v[c] = f[c] * w[c];
  return StepFunction(w.mesh(), std::move(v));
}

// chi_Q as cell values: the fraction of each cell inside Q
std::vector<double> indicator(const Mesh& m, const DyadicCube& q) {
  std::vector<double> v(m.cellCount(), 0.0);
  const double full = m.dim() == 1 ? 3.0 : 9.0;
  forEachCellIn(m, m.bounds(q), [&](std::size_t c, std::int64_t ov) {
    v[c] = static_cast<double>(ov) / full;
  });
  return v;
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

std::string cubeLabel(const DyadicCube& q, int n) { return toJson(q, n).dump(); }

// per-cube sigma(R)^{-1/p} (int_R (I^{S(R)}(w chi_R))^q v)^{1/q}; NaN where
// w(R) = 0
std::vector<double> testingSweep(const StepFunction& w, const StepFunction& v,
                                 double alpha, double p, double q,
                                 const SparseFamily& s) {
  const DyadicGrid& g = s.grid();
  const int n = g.mesh().dim();
  const CubeIntegrator iw(w), iv(v);
  const auto members = s.members();
  std::vector<double> coef(members.size()), vE(members.size());
  for (std::size_t k = 0; k < members.size(); ++k) {
    const std::size_t Q = members[k];
    coef[k] = std::pow(g.volume(Q), alpha / n) * iw.average(g, Q);
    double e = iv.integral(g.box(Q));
    for (std::size_t c : s.treeChildren(k)) e -= iv.integral(g.box(c));
    vE[k] = std::max(e, 0.0);
  }
  std::vector<std::vector<std::size_t>> inside(g.size());
  for (std::size_t k = 0; k < members.size(); ++k)
    for (std::ptrdiff_t r = static_cast<std::ptrdiff_t>(members[k]); r >= 0;
         r = g.parent(r))
      inside[r].push_back(k);

  std::vector<double> out(g.size(), kNaN);
  std::vector<double> val(members.size(), 0.0);
  for (std::size_t R = 0; R < g.size(); ++R) {
    const double wR = iw.integral(g.box(R));
    if (!(wR > 0.0)) continue;
    const int lev = g.level(R);
    double acc = 0.0;
    for (std::size_t k : inside[R]) {  // coarse to fine
      const std::ptrdiff_t par = s.treeParent(k);
      const bool parentInside = par >= 0 && g.level(members[par]) >= lev;
      val[k] = coef[k] + (parentInside ? val[par] : 0.0);
      if (vE[k] > 0.0) acc += std::pow(val[k], q) * vE[k];
    }
    out[R] = std::pow(acc, 1.0 / q) / std::pow(wR, 1.0 / p);
  }
  return out;
}

void fold(const std::vector<double>& per, const std::vector<DyadicCube>& cubes,
          double& best, std::optional<DyadicCube>& witness, std::size_t& skipped) {
  for (std::size_t i = 0; i < per.size(); ++i) {
    if (std::isnan(per[i])) {
      ++skipped;
      continue;
    }
    if (!witness || per[i] > best) {
      best = per[i];
      witness = cubes[i];
    }
  }
}

}  // namespace

// --- operators --------------------------------------------------------------

LinearOperator sparseOperator(const SparseFamily& s, double alpha) {
  if (s.shift() != 0)
    throw std::invalid_argument("sparseOperator: family must be on the shift-0 grid");
  auto grid = s.gridPtr();
  std::vector<std::size_t> members(s.members().begin(), s.members().end());
  return {"sparse", [grid, members, alpha](const StepFunction& f) {
            return sparseRiesz(f, alpha, *grid, members);
          }};
}

LinearOperator dyadicOperator(const Mesh& mesh, double alpha) {
  auto grid = std::make_shared<const DyadicGrid>(mesh, 0);
  return {"dyadic", [grid, alpha](const StepFunction& f) {
            return dyadicRiesz(f, alpha, *grid);
          }};
}

LinearOperator referenceOperator(double alpha, KernelMode mode) {
  return {"reference:" + toString(mode), [alpha, mode](const StepFunction& f) {
            return rieszReference(f, alpha, mode);
          }};
}

// --- norms ------------------------------------------------------------------

double weakLorentzNorm(const StepFunction& h, const StepFunction& u, double q) {
  std::vector<std::size_t> idx(h.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return h[a] > h[b] || (h[a] == h[b] && a < b);
  });
  const double vol = h.mesh().cellVolume();
  double mass = 0.0, best = 0.0;
  for (std::size_t k = 0; k < idx.size();) {
    const double v = h[idx[k]];
    if (!(v > 0.0)) break;
    while (k < idx.size() && h[idx[k]] == v) mass += u[idx[k++]] * vol;
    // t just below v sees every cell with h >= v
    best = std::max(best, v * std::pow(mass, 1.0 / q));
  }
  return best;
}

double lebesgueNorm(const StepFunction& h, const StepFunction& u, double q) {
  return normOf(h.values(), u, q);
}

double strongFunctional(const StepFunction& f, const StepFunction& u,
                        const StepFunction& sigma, const ExponentTuple& e,
                        const LinearOperator& T) {
  const double nf = normOf(f.values(), sigma, e.p());
  if (!(nf > 0.0)) return 0.0;
  return lebesgueNorm(T(f.times(sigma)), u, e.q()) / nf;
}

double weakFunctional(const StepFunction& f, const StepFunction& u,
                      const StepFunction& sigma, const ExponentTuple& e,
                      const LinearOperator& T) {
  const double nf = normOf(f.values(), sigma, e.p());
  if (!(nf > 0.0)) return 0.0;
  return weakLorentzNorm(T(f.times(sigma)), u, e.q()) / nf;
}

// --- testing constants ------------------------------------------------------

TestingReport continuousTesting(const StepFunction& u, const StepFunction& sigma,
                            const ExponentTuple& e, KernelMode mode,
                            const CubeCorpus& corpus) {
  TestingReport r;
  const Mesh& m = u.mesh();
  const double vol = m.cellVolume();
  const double pp = e.pPrime(), qp = e.qPrime();
  for (const CubeRef& c : corpus.cubes()) r.cubes.push_back(corpus.cube(c));
  r.directPerCube.assign(corpus.size(), kNaN);
  r.dualPerCube.assign(corpus.size(), kNaN);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto chi = indicator(m, r.cubes[i]);
    // (w1, w2, outer exponent, denominator exponent)
    auto one = [&](const StepFunction& w1, const StepFunction& w2, double qq,
                   double pden) {
      const StepFunction cw = times(chi, w1);
      const double mass = cw.total();
      if (!(mass > 0.0)) return kNaN;
      const StepFunction h = rieszReference(cw, e.alpha(), mode);
      double acc = 0.0;
      for (std::size_t c = 0; c < chi.size(); ++c)
        if (chi[c] > 0.0 && w2[c] > 0.0) acc += chi[c] * std::pow(h[c], qq) * w2[c];
      return std::pow(acc * vol, 1.0 / qq) / std::pow(mass, 1.0 / pden);
    };
    r.directPerCube[i] = one(sigma, u, e.q(), e.p());
    r.dualPerCube[i] = one(u, sigma, pp, qp);
  }
  fold(r.directPerCube, r.cubes, r.direct, r.directWitness, r.directSkipped);
  fold(r.dualPerCube, r.cubes, r.dual, r.dualWitness, r.dualSkipped);
  return r;
}

TestingReport continuousTesting(const StepFunction& u, const StepFunction& sigma,
                            const ExponentTuple& e, KernelMode mode) {
  return continuousTesting(u, sigma, e, mode, CubeCorpus::insideBox(u.mesh()));
}

TestingReport dyadicTesting(const StepFunction& u, const StepFunction& sigma,
                            const ExponentTuple& e, const SparseFamily& s) {
  TestingReport r;
  const DyadicGrid& g = s.grid();
  r.cubes.assign(g.cubes().begin(), g.cubes().end());
  r.directPerCube = testingSweep(sigma, u, e.alpha(), e.p(), e.q(), s);
  r.dualPerCube = testingSweep(u, sigma, e.alpha(), e.qPrime(), e.pPrime(), s);
  fold(r.directPerCube, r.cubes, r.direct, r.directWitness, r.directSkipped);
  fold(r.dualPerCube, r.cubes, r.dual, r.dualWitness, r.dualSkipped);
  return r;
}

// --- norm estimation --------------------------------------------------------

namespace {

struct Start {
  std::string label;
  std::vector<double> f;
};

struct Run {
  double value = 0.0;
  std::vector<double> f, g;
  std::vector<double> history;
  int iterations = 0;
  bool converged = false;
};

Run alternate(std::vector<double> f, const StepFunction& u,
              const StepFunction& sigma, const ExponentTuple& e,
              const LinearOperator& T, const NormOptions& opt) {
  const double p = e.p(), q = e.q(), pp = e.pPrime(), qp = e.qPrime();
  Run run;
  f = normalized(std::move(f), sigma, p);
  StepFunction h = T(times(f, sigma));
  double value = normOf(h.values(), u, q);
  run.history.push_back(value);
  std::vector<double> g;
  for (int it = 0; it < opt.maxIterations; ++it) {
    if (!(value > 0.0)) break;
    g = normalized(powerOn(h.values(), u, q - 1.0), u, qp);
    const StepFunction k = T(times(g, u));
    std::vector<double> f2 = normalized(powerOn(k.values(), sigma, pp - 1.0), sigma, p);
    const StepFunction h2 = T(times(f2, sigma));
    const double v2 = normOf(h2.values(), u, q);
    ++run.iterations;
    if (v2 < value * (1.0 - 1e-12))
      throw std::logic_error("strongNormLower: objective decreased");
    const bool done = v2 - value <= opt.relTol * value;
    if (v2 >= value) {
      f = std::move(f2);
      h = h2;
      value = v2;
    }
    run.history.push_back(value);
    if (done) {
      run.converged = true;
      break;
    }
  }
  run.value = value;
  run.f = std::move(f);
  run.g = normalized(powerOn(h.values(), u, q - 1.0), u, qp);
  return run;
}

std::vector<Start> cubeStarts(const Mesh& m, const NormOptions& opt) {
  std::vector<Start> out;
  std::vector<DyadicCube> cubes = opt.extraCubes;
  if (opt.family)
    for (std::size_t q : opt.family->members())
      cubes.push_back(opt.family->grid().cube(q));
  for (const DyadicCube& q : cubes)
    out.push_back({"cube:" + cubeLabel(q, m.dim()), indicator(m, q)});
  return out;
}

std::vector<Start> randomStarts(const Mesh& m, const NormOptions& opt) {
  std::vector<Start> out;
  std::mt19937_64 rng(opt.seed);
  for (int i = 0; i < opt.randomStarts; ++i) {
    std::vector<double> f(m.cellCount());
    for (double& x : f) x = unitDouble(rng());
    out.push_back({"random:" + std::to_string(i), std::move(f)});
  }
  return out;
}

}  // namespace

NormEstimate strongNormLower(const StepFunction& u, const StepFunction& sigma,
                             const ExponentTuple& e, const LinearOperator& T,
                             const NormOptions& opt) {
  const Mesh& m = u.mesh();
  NormEstimate est;
  est.seedSet = "cubes(top " + std::to_string(opt.cubeStarts) + ")+profile+random(" +
                std::to_string(opt.randomStarts) + ",seed=" +
                std::to_string(opt.seed) + ")";
  if (sigma.isZero() || u.isZero()) {
    est.degenerate = true;
    est.f.assign(m.cellCount(), 0.0);
    return est;
  }
  // rank the chi_R starts by their starting value, keep the best few
  auto cubes = cubeStarts(m, opt);
  std::vector<std::pair<double, std::size_t>> rank;
  for (std::size_t i = 0; i < cubes.size(); ++i)
    rank.emplace_back(strongFunctional(StepFunction(m, cubes[i].f), u, sigma, e, T), i);
  std::stable_sort(rank.begin(), rank.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<Start> starts;
  for (std::size_t i = 0; i < rank.size() && static_cast<int>(i) < opt.cubeStarts; ++i)
    starts.push_back(std::move(cubes[rank[i].second]));
  starts.push_back({"profile", powerOn(sigma.values(), sigma, e.pPrime() - 1.0)});
  for (auto& s : randomStarts(m, opt)) starts.push_back(std::move(s));

  bool any = false;
  for (Start& s : starts) {
    if (!(normOf(s.f, sigma, e.p()) > 0.0)) continue;
    Run run = alternate(std::move(s.f), u, sigma, e, T, opt);
    if (!any || run.value > est.value) {
      any = true;
      est.value = run.value;
      est.f = std::move(run.f);
      est.g = std::move(run.g);
      est.history = std::move(run.history);
      est.iterations = run.iterations;
      est.converged = run.converged;
      est.seed = s.label;
    }
  }
  if (!any || !(est.value > 0.0)) {
    est.degenerate = true;
    if (est.f.empty()) est.f.assign(m.cellCount(), 0.0);
  }
  return est;
}

NormEstimate weakNormLower(const StepFunction& u, const StepFunction& sigma,
                           const ExponentTuple& e, const LinearOperator& T,
                           const NormOptions& opt, const NormEstimate* strong) {
  const Mesh& m = u.mesh();
  NormEstimate est;
  est.seedSet = "strong witness+cubes+random(" + std::to_string(opt.randomStarts) +
                ",seed=" + std::to_string(opt.seed) + ")";
  if (sigma.isZero() || u.isZero()) {
    est.degenerate = true;
    est.f.assign(m.cellCount(), 0.0);
    return est;
  }
  std::vector<Start> starts;
  NormEstimate own;
  if (!strong) {
    own = strongNormLower(u, sigma, e, T, opt);
    strong = &own;
  }
  if (!strong->degenerate) starts.push_back({"strong", strong->f});
  for (auto& s : cubeStarts(m, opt)) starts.push_back(std::move(s));
  for (auto& s : randomStarts(m, opt)) starts.push_back(std::move(s));
  bool any = false;
  for (Start& s : starts) {
    const double v = weakFunctional(StepFunction(m, s.f), u, sigma, e, T);
    if (!any || v > est.value) {
      any = true;
      est.value = v;
      est.f = normalized(s.f, sigma, e.p());
      est.seed = s.label;
    }
  }
  est.converged = true;
  if (!(est.value > 0.0)) est.degenerate = true;
  return est;
}

SandwichRow testingSandwich(const StepFunction& u, const StepFunction& sigma,
                         const ExponentTuple& e, const SparseFamily& s,
                         NormOptions opt) {
  SandwichRow row;
  const TestingReport t = dyadicTesting(u, sigma, e, s);
  row.direct = t.direct;
  row.dual = t.dual;
  row.directWitness = t.directWitness;
  if (s.empty() || !(t.direct + t.dual > 0.0) || !(t.dual > 0.0)) {
    row.skipped = true;
    row.r1 = row.r2 = kNaN;
    return row;
  }
  if (t.directWitness) opt.extraCubes.push_back(*t.directWitness);
  opt.family = &s;
  const LinearOperator T = sparseOperator(s, e.alpha());
  const NormEstimate strong = strongNormLower(u, sigma, e, T, opt);
  const NormEstimate weak = weakNormLower(u, sigma, e, T, opt, &strong);
  row.strong = strong.value;
  row.weak = weak.value;
  row.r1 = row.strong / (row.direct + row.dual);
  row.r2 = row.weak / row.dual;
  row.testingBelowNorm = row.direct <= row.strong + 1e-8;
  return row;
}

// --- theorem checks ---------------------------------------------------------

namespace {

BoundRatio ratioOf(double testing, double bound) {
  BoundRatio b;
  b.testing = testing;
  b.bound = bound;
  if (!std::isfinite(bound) || !(bound > 0.0)) {
    b.skipped = true;
    b.ratio = kNaN;
    b.reason = std::isinf(bound) ? "infinite characteristic" : "null characteristic";
    return b;
  }
  b.ratio = testing / bound;
  return b;
}

YoungFunction bump(BumpKind kind, double order, double delta) {
  return kind == BumpKind::Log ? YoungFunction::logBump(order, delta)
                               : YoungFunction::logLogBump(order, delta);
}

}  // namespace

MixedBoundCheck mixedBoundCheck(const StepFunction& u, const StepFunction& sigma,
                           const ExponentTuple& e, const SparseFamily& s) {
  if (!e.isSobolev())
    throw RangeRefusal("mixedBoundCheck: needs 1/p - 1/q = alpha/n");
  const TestingReport t = dyadicTesting(u, sigma, e, s);
  const double A = twoWeightAp(u, sigma, e.sp()).value;
  const double fwu = fujiiWilson(u).value;
  const double fws = fujiiWilson(sigma).value;
  MixedBoundCheck c;
  c.dual = ratioOf(t.dual, std::pow(A, 1.0 / e.q()) * std::pow(fwu, 1.0 / e.pPrime()));
  c.direct = ratioOf(t.direct, std::pow(A, 1.0 / e.q()) * std::pow(fws, 1.0 / e.q()));
  return c;
}

BoundRatio bumpBoundCheck(const StepFunction& u, const StepFunction& sigma,
                           const ExponentTuple& e, const SparseFamily& s,
                           BumpKind kind, double delta) {
  if (!(e.p() < e.q()) || !rangeConditions(e).weak)
    throw RangeRefusal("bumpBoundCheck: needs p < q and (p'/q')(1 - alpha/n) >= 1");
  const TestingReport t = dyadicTesting(u, sigma, e, s);
  const double K = bumpConstant(u, sigma, e, bump(kind, e.q(), delta)).value;
  return ratioOf(t.dual, K);
}

BoundRatio bumpDualBoundCheck(const StepFunction& u, const StepFunction& sigma,
                               const ExponentTuple& e, const SparseFamily& s,
                               BumpKind kind, double delta) {
  const double cond = (e.q() / e.p()) * (1.0 - e.alpha() / e.n());
  if (!(e.p() < e.q()) || cond < 1.0 - ExponentTuple::kTol)
    throw RangeRefusal("bumpDualBoundCheck: needs p < q and (q/p)(1 - alpha/n) >= 1");
  const TestingReport t = dyadicTesting(u, sigma, e, s);
  const double K = bumpConstant(u, sigma, e, YoungFunction::power(e.q()),
                                bump(kind, e.pPrime(), delta))
                       .value;
  return ratioOf(t.direct, K);
}

// --- calibration ------------------------------------------------------------

std::vector<CorpusPair> sandwichCorpus(const Mesh& mesh, const ExponentTuple& e,
                                       std::uint64_t seed, int count) {
  std::mt19937_64 rng(seed);
  auto U = [&] { return unitDouble(rng()); };
  const double dualExp = 1.0 - e.pPrime();
  const std::string dualLabel = "u^" + fmt(dualExp);
  std::vector<CorpusPair> out;
  for (int i = 0; i < count; ++i) {
    std::string us, ss;
    switch (i % 4) {
      case 0:
        us = "martingale:seed=" + std::to_string(rng() % 100000) +
             ",vol=" + fmt(0.1 + 0.3 * U());
        break;
      case 1:
        us = "power:center=" + fmt(0.1 + 0.8 * U()) + ",beta=" + fmt(-0.3 + 0.8 * U());
        break;
      case 2:
        us = "twovalue:a=" + fmt(1.0 + 7.0 * U()) + ",b=1,split=" + fmt(0.1 + 0.8 * U());
        break;
      default:
        us = "martingale:seed=" + std::to_string(rng() % 100000) +
             ",vol=" + fmt(0.1 + 0.3 * U());
        ss = "martingale:seed=" + std::to_string(rng() % 100000) +
             ",vol=" + fmt(0.1 + 0.3 * U());
        break;
    }
    StepFunction u = generateWeight(mesh, us);
    StepFunction sg = ss.empty() ? u.power(dualExp) : generateWeight(mesh, ss);
    out.push_back({us, ss.empty() ? dualLabel : ss, std::move(u), std::move(sg)});
  }
  return out;
}

Envelope measureEnvelope(const CalibrationSetup& setup, std::uint64_t seed) {
  const Mesh mesh(setup.n, setup.J, setup.L, setup.T);
  const ExponentTuple e = ExponentTuple::sobolev(setup.n, setup.alpha, setup.p);
  Envelope env;
  env.r2Lo = std::numeric_limits<double>::infinity();
  bool anyR2 = false;
  auto upd = [](double& slot, const BoundRatio& b) {
    if (!b.skipped) slot = std::max(slot, b.ratio);
  };
  for (const CorpusPair& pr : sandwichCorpus(mesh, e, seed, setup.count)) {
    const SparseFamily s = buildSparse(pr.u, 0u).family;
    const MixedBoundCheck mb = mixedBoundCheck(pr.u, pr.sigma, e, s);
    upd(env.mixed, mb.dual);
    upd(env.mixedSym, mb.direct);
    upd(env.bump, bumpBoundCheck(pr.u, pr.sigma, e, s, BumpKind::Log, setup.delta));
    upd(env.bumpLogLog, bumpBoundCheck(pr.u, pr.sigma, e, s, BumpKind::LogLog, setup.delta));
    NormOptions opt;
    opt.seed = seed;
    const SandwichRow row = testingSandwich(pr.u, pr.sigma, e, s, opt);
    if (!row.skipped) {
      env.r1 = std::max(env.r1, row.r1);
      env.r2Lo = std::min(env.r2Lo, row.r2);
      env.r2Hi = std::max(env.r2Hi, row.r2);
      anyR2 = true;
    }
  }
  if (!anyR2) env.r2Lo = 0.0;

  // operator constants on random densities, same seed
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  const auto corpus = sandwichCorpus(mesh, e, seed, setup.count);
  const DyadicGrid g0(mesh, 0);
  std::vector<DyadicGrid> grids;
  for (unsigned t = 0; t < mesh.shiftCount(); ++t) grids.emplace_back(mesh, t);
  env.dyadicLower = std::numeric_limits<double>::infinity();
  for (int i = 0; i < setup.count; ++i) {
    std::vector<double> v(mesh.cellCount());
    for (double& x : v) x = 0.05 + unitDouble(rng());
    const StepFunction f(mesh, std::move(v));
    const StepFunction ref = rieszReference(f, setup.alpha, KernelMode::Lower);
    std::vector<double> best(mesh.cellCount(), 0.0);
    for (const DyadicGrid& g : grids) {
      const StepFunction d = dyadicRiesz(f, setup.alpha, g);
      for (std::size_t c = 0; c < best.size(); ++c) best[c] = std::max(best[c], d[c]);
    }
    const auto cmp = comparePointwise(StepFunction(mesh, best), ref);
    env.dyadicLower = std::min(env.dyadicLower, cmp.minRatio);

    const StepFunction& mu = corpus[i].u;
    const double fn = lebesgueNorm(f, mu, e.p());
    if (fn > 0.0) {
      const StepFunction m = fracMaximalWeighted(f, mu, setup.alpha, g0);
      env.fracMaximal = std::max(env.fracMaximal, lebesgueNorm(m, mu, e.q()) / fn);
    }
  }
  return env;
}

std::string defaultCalibrationPath() {
  return std::string(RIESZ_DATA_DIR) + "/calibration.json";
}

std::pair<CalibrationSetup, Envelope> loadCalibration(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open calibration file " + path);
  const Json j = Json::parse(in);
  CalibrationSetup s;
  const Json& js = j.at("setup");
  s.n = js.at("n").get<int>();
  s.J = js.at("J").get<int>();
  s.L = js.at("L").get<int>();
  s.T = js.at("T").get<int>();
  s.alpha = js.at("alpha").get<double>();
  s.p = js.at("p").get<double>();
  s.count = js.at("count").get<int>();
  s.delta = js.at("delta").get<double>();
  Envelope env;
  const Json& je = j.at("envelope");
  env.mixed = numberFrom(je.at("mixed"));
  env.mixedSym = numberFrom(je.at("mixedSym"));
  env.bump = numberFrom(je.at("bump"));
  env.bumpLogLog = numberFrom(je.at("bumpLogLog"));
  env.r1 = numberFrom(je.at("r1"));
  env.r2Lo = numberFrom(je.at("r2Lo"));
  env.r2Hi = numberFrom(je.at("r2Hi"));
  env.dyadicLower = numberFrom(je.at("dyadicLower"));
  env.fracMaximal = numberFrom(je.at("fracMaximal"));
  return {s, env};
}

}  // namespace riesz
