#include "riesz/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace riesz {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Largest k with 2^{m k} < v, for v > 0.
int topExponent(double v, int m) {
  int e = 0;
  std::frexp(v, &e);  // 2^{e-1} <= v < 2^e
  int k = static_cast<int>(std::floor(static_cast<double>(e - 1) / m));
  while (std::ldexp(1.0, m * (k + 1)) < v) ++k;
  while (!(std::ldexp(1.0, m * k) < v)) --k;
  return k;
}

// a with 2^a < v <= 2^{a+1}, for v > 0.
int sliceIndex(double v) {
  int e = 0;
  const double mant = std::frexp(v, &e);
  return mant == 0.5 ? e - 2 : e - 1;
}

bool inSlice(double v, int a) {
  return std::ldexp(1.0, a) < v && v <= std::ldexp(1.0, a + 1);
}

// 2^{-b} fp < fq <= 2^{1-b} fp
bool inBSlice(double fq, double fp, int b) {
  return std::ldexp(fp, -b) < fq && fq <= std::ldexp(fp, 1 - b);
}

int bIndex(double fq, double fp) {
  int b = -sliceIndex(fq / fp);
  while (!(fq <= std::ldexp(fp, 1 - b))) --b;
  while (!(std::ldexp(fp, -b) < fq)) ++b;
  return b;
}

double tickAverage(const CubeIntegrator& integ, const DyadicGrid& g,
                   std::size_t i) {
  return integ.tickIntegral(g.box(i)) / toDouble(g.measure(i));
}

bool sameGrid(const DyadicGrid& a, const DyadicGrid& b) {
  return a.mesh() == b.mesh() && a.shift() == b.shift();
}

}  // namespace

// --- SparseFamily -----------------------------------------------------------

SparseFamily::SparseFamily(std::shared_ptr<const DyadicGrid> grid,
                           std::vector<std::size_t> members)
    : grid_(std::move(grid)), members_(std::move(members)) {
  if (!grid_) throw std::invalid_argument("SparseFamily: null grid");
  std::sort(members_.begin(), members_.end());
  members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
  if (!members_.empty() && members_.back() >= grid_->size())
    throw std::out_of_range("SparseFamily: cube index outside the grid");
  slot_.assign(grid_->size(), -1);
  for (std::size_t s = 0; s < members_.size(); ++s)
    slot_[members_[s]] = static_cast<std::ptrdiff_t>(s);
  treeParent_.assign(members_.size(), -1);
  treeChildren_.assign(members_.size(), {});
  for (std::size_t s = 0; s < members_.size(); ++s) {
    std::ptrdiff_t p = grid_->parent(members_[s]);
    while (p >= 0 && slot_[p] < 0) p = grid_->parent(p);
    if (p >= 0) {
      treeParent_[s] = slot_[p];
      treeChildren_[slot_[p]].push_back(members_[s]);
    }
  }
}

SparseFamily SparseFamily::fromCubes(const Mesh& mesh, unsigned shift,
                                     std::span<const DyadicCube> cubes) {
  auto grid = std::make_shared<const DyadicGrid>(mesh, shift);
  std::vector<std::size_t> idx;
  idx.reserve(cubes.size());
  for (const DyadicCube& q : cubes) {
    if (q.shift != shift)
      throw std::invalid_argument("SparseFamily: cube of another grid");
    auto i = grid->find(q);
    if (!i) throw std::invalid_argument("SparseFamily: cube not enumerated");
    idx.push_back(*i);
  }
  return SparseFamily(std::move(grid), std::move(idx));
}

std::vector<std::size_t> SparseFamily::within(std::size_t root) const {
  std::vector<std::size_t> out;
  for (std::size_t m : members_)
    if (grid_->contains(root, m)) out.push_back(m);
  return out;
}

// --- construction -----------------------------------------------------------

SparseBuild buildSparse(const StepFunction& f,
                        std::shared_ptr<const DyadicGrid> grid, Exec exec) {
  if (f.isZero()) throw std::invalid_argument("buildSparse: f vanishes");
  if (!(f.mesh() == grid->mesh()))
    throw std::invalid_argument("buildSparse: mesh mismatch");
  const DyadicGrid& g = *grid;
  const CubeIntegrator integ(f);
  const auto count = static_cast<std::ptrdiff_t>(g.size());
  std::vector<double> avg(g.size());
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
  for (std::ptrdiff_t i = 0; i < count; ++i)
    avg[i] = tickAverage(integ, g, static_cast<std::size_t>(i));

  const int m = g.mesh().dim() + 1;
  std::vector<double> maxAnc(g.size(), 0.0);
  std::vector<std::size_t> members;
  std::vector<int> top;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const std::ptrdiff_t p = g.parent(i);
    if (p >= 0) maxAnc[i] = std::max(maxAnc[p], avg[p]);
    if (!(avg[i] > 0.0)) continue;
    const int k = topExponent(avg[i], m);
    if (maxAnc[i] <= std::ldexp(1.0, m * k)) {
      members.push_back(i);
      top.push_back(k);
    }
  }
  return {SparseFamily(std::move(grid), std::move(members)), std::move(top)};
}

SparseBuild buildSparse(const StepFunction& f, unsigned shift, Exec exec) {
  return buildSparse(f, std::make_shared<const DyadicGrid>(f.mesh(), shift),
                     exec);
}

double sparseDominationConstant(int n, double alpha) {
  return std::ldexp(1.0, n + 1) / (1.0 - std::exp2(-alpha));
}

DominationCheck checkDomination(const StepFunction& f, double alpha,
                                const SparseFamily& s, Exec exec) {
  DominationCheck out;
  out.constant = sparseDominationConstant(f.mesh().dim(), alpha);
  const StepFunction d = dyadicRiesz(f, alpha, s.grid(), exec);
  const StepFunction sp = sparseRiesz(f, alpha, s.grid(), s.members(), exec);
  for (std::size_t c = 0; c < d.size(); ++c) {
    if (d[c] == 0.0) continue;
    const double rhs = out.constant * sp[c];
    const double r = rhs > 0.0 ? d[c] / rhs : std::numeric_limits<double>::infinity();
    if (d[c] > rhs) ++out.violations;
    if (r > out.worstRatio) {
      out.worstRatio = r;
      out.worstCell = c;
    }
  }
  return out;
}

// --- certification ----------------------------------------------------------

SparseCertificate verifySparse(const SparseFamily& s) {
  SparseCertificate cert;
  const DyadicGrid& g = s.grid();
  cert.eMeasure.resize(s.size());
  Measure eTotal = 0, rootTotal = 0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    const std::size_t q = s.members()[k];
    const Measure mq = g.measure(q);
    Measure inner = 0;
    for (std::size_t c : s.treeChildren(k)) inner += g.measure(c);
    cert.eMeasure[k] = mq - inner;
    eTotal += mq - inner;
    if (s.treeParent(k) < 0) rootTotal += mq;
    const double ratio = toDouble(inner) / toDouble(mq);
    if (!cert.worstCube || ratio > cert.worstRatio) {
      cert.worstRatio = ratio;
      cert.worstCube = q;
    }
    if (2 * inner > mq && cert.sparse) {
      cert.sparse = false;
      cert.violation = q;
    }
  }
  if (eTotal != rootTotal) cert.disjoint = false;
  return cert;
}

bool OverlapLevelSet::withinBound(int k) const {
  if (k < 0) return true;
  if (k > 100) return measure == 0;
  return (measure << k) <= rootMeasure;
}

OverlapLevelSet overlapLevelSet(const SparseFamily& s, std::size_t root, int k) {
  if (k < 1) throw std::invalid_argument("overlapLevelSet: k must be >= 1");
  const DyadicGrid& g = s.grid();
  OverlapLevelSet out;
  out.rootMeasure = g.measure(root);
  std::map<std::size_t, int> depth;  // member slot -> depth below root
  for (std::size_t q : s.within(root)) {
    const std::size_t slot = static_cast<std::size_t>(s.slot(q));
    const std::ptrdiff_t p = s.treeParent(slot);
    const int d = (p >= 0 && depth.count(static_cast<std::size_t>(p)))
                      ? depth[static_cast<std::size_t>(p)] + 1
                      : 1;
    depth[slot] = d;
    if (static_cast<int>(out.generations.size()) < d) out.generations.resize(d);
    out.generations[d - 1].push_back(q);
  }
  if (static_cast<int>(out.generations.size()) > k)
    for (std::size_t q : out.generations[k]) out.measure += g.measure(q);
  return out;
}

// --- corona -----------------------------------------------------------------

namespace {

struct CoronaAverages {
  double ubar = 0.0, sbar = 0.0, slice = 0.0, frac = 0.0;
};

CoronaAverages coronaAverages(const DyadicGrid& g, std::size_t q,
                              const CubeIntegrator& iu,
                              const CubeIntegrator& is, SliceMode mode,
                              int n, double alpha, double p, double qq) {
  CoronaAverages c;
  c.ubar = tickAverage(iu, g, q);
  c.sbar = tickAverage(is, g, q);
  const double vol = g.volume(q);
  const double pp = p / (p - 1.0);
  c.slice = std::pow(c.ubar, 1.0 / qq) * std::pow(c.sbar, 1.0 / pp);
  if (mode == SliceMode::Fractional)
    c.slice *= std::pow(vol, alpha / n + 1.0 / qq - 1.0 / p);
  c.frac = std::pow(vol, alpha / n) * c.ubar;
  return c;
}

// Position in cd.cubes of every grid cube, or -1.
std::vector<std::ptrdiff_t> positionTable(const CoronaDecomposition& cd) {
  std::vector<std::ptrdiff_t> pos(cd.grid->size(), -1);
  for (std::size_t i = 0; i < cd.cubes.size(); ++i)
    pos[cd.cubes[i].cube] = static_cast<std::ptrdiff_t>(i);
  return pos;
}

}  // namespace

std::vector<std::size_t> CoronaDecomposition::slice(int a) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < cubes.size(); ++i)
    if (cubes[i].a == a) out.push_back(i);
  return out;
}

std::vector<std::size_t> CoronaDecomposition::stopping(int a) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < cubes.size(); ++i)
    if (cubes[i].a == a && cubes[i].stopping) out.push_back(i);
  return out;
}

std::vector<std::size_t> CoronaDecomposition::governed(int a,
                                                       std::size_t P) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < cubes.size(); ++i)
    if (cubes[i].a == a && cubes[i].stop == P) out.push_back(i);
  return out;
}

std::vector<std::size_t> CoronaDecomposition::governed(int a, std::size_t P,
                                                       int b) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < cubes.size(); ++i)
    if (cubes[i].a == a && cubes[i].stop == P && cubes[i].b == b)
      out.push_back(i);
  return out;
}

std::vector<int> CoronaDecomposition::bValues(int a, std::size_t P) const {
  std::vector<int> out;
  for (std::size_t i : governed(a, P)) out.push_back(cubes[i].b);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

CoronaDecomposition coronaDecompose(const SparseFamily& s, std::size_t root,
                                    const StepFunction& u,
                                    const StepFunction& sigma,
                                    const ExponentTuple& e, SliceMode mode) {
  const DyadicGrid& g = s.grid();
  if (!(u.mesh() == g.mesh()) || !(sigma.mesh() == g.mesh()))
    throw std::invalid_argument("coronaDecompose: mesh mismatch");
  if (root >= g.size()) throw std::out_of_range("coronaDecompose: root");
  CoronaDecomposition cd;
  cd.grid = s.gridPtr();
  cd.root = root;
  cd.mode = mode;
  cd.n = e.n();
  cd.alpha = e.alpha();
  cd.p = e.p();
  cd.q = e.q();
  const CubeIntegrator iu(u), is(sigma);

  std::vector<std::ptrdiff_t> pos(g.size(), -1);
  double vmax = 0.0;
  for (std::size_t q : s.within(root)) {
    const CoronaAverages av =
        coronaAverages(g, q, iu, is, mode, cd.n, cd.alpha, cd.p, cd.q);
    if (!(av.ubar > 0.0) || !(av.sbar > 0.0)) {
      cd.unassigned.push_back(q);
      continue;
    }
    CoronaCube c;
    c.cube = q;
    c.slice = av.slice;
    c.frac = av.frac;
    c.a = sliceIndex(av.slice);
    vmax = std::max(vmax, av.slice);

    // nearest ancestor in the same slice, inside S(R)
    std::ptrdiff_t anc = -1;
    for (std::ptrdiff_t t = s.treeParent(static_cast<std::size_t>(s.slot(q)));
         t >= 0; t = s.treeParent(static_cast<std::size_t>(t))) {
      const std::size_t gi = s.members()[t];
      if (pos[gi] < 0) {
        if (!g.contains(root, gi)) break;
        continue;
      }
      if (cd.cubes[pos[gi]].a == c.a) {
        anc = pos[gi];
        break;
      }
    }
    if (anc < 0) {
      c.stopping = true;
      c.generation = 0;
      c.stop = q;
    } else {
      const CoronaCube& gov = cd.cubes[pos[cd.cubes[anc].stop]];
      if (c.frac > 2.0 * gov.frac) {
        c.stopping = true;
        c.generation = gov.generation + 1;
        c.parentStop = gov.cube;
        c.stop = q;
      } else {
        c.stop = gov.cube;
      }
    }
    c.b = c.stopping ? 1 : bIndex(c.frac, cd.cubes[pos[c.stop]].frac);
    pos[q] = static_cast<std::ptrdiff_t>(cd.cubes.size());
    cd.cubes.push_back(c);
    cd.slices.push_back(c.a);
  }
  std::sort(cd.slices.begin(), cd.slices.end());
  cd.slices.erase(std::unique(cd.slices.begin(), cd.slices.end()),
                  cd.slices.end());
  cd.gamma = cd.cubes.empty() ? -std::numeric_limits<double>::infinity()
                              : std::log2(vmax);
  return cd;
}

CoronaCertificate certifyCorona(const CoronaDecomposition& cd,
                                const SparseFamily& s, const StepFunction& u,
                                const StepFunction& sigma) {
  CoronaCertificate cert;
  auto fail = [&](bool& flag, const std::string& what) {
    if (flag && cert.firstFailure.empty()) cert.firstFailure = what;
    flag = false;
  };
  const DyadicGrid& g = s.grid();
  if (!sameGrid(*cd.grid, g)) {
    fail(cert.partition, "decomposition built on another grid");
    return cert;
  }
  const CubeIntegrator iu(u), is(sigma);
  const auto pos = positionTable(cd);

  // partition of S(R)
  std::vector<char> seen(g.size(), 0);
  for (const CoronaCube& c : cd.cubes) {
    if (seen[c.cube]++) fail(cert.partition, "cube listed twice");
  }
  for (std::size_t q : cd.unassigned) {
    if (seen[q]++) fail(cert.partition, "cube listed twice");
    if (tickAverage(iu, g, q) > 0.0 && tickAverage(is, g, q) > 0.0)
      fail(cert.partition, "unassigned cube with positive averages");
  }
  const auto sr = s.within(cd.root);
  std::size_t listed = 0;
  for (std::size_t q : sr) {
    if (!seen[q]) fail(cert.partition, "member of S(R) missing");
    else ++listed;
  }
  if (listed != cd.cubes.size() + cd.unassigned.size())
    fail(cert.partition, "cube outside S(R)");
  {
    std::vector<int> a;
    for (const CoronaCube& c : cd.cubes) a.push_back(c.a);
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    if (a != cd.slices) fail(cert.partition, "slice list mismatch");
  }

  // slice membership from recomputed averages
  std::vector<double> frac(cd.cubes.size());
  for (std::size_t i = 0; i < cd.cubes.size(); ++i) {
    const CoronaCube& c = cd.cubes[i];
    const CoronaAverages av = coronaAverages(g, c.cube, iu, is, cd.mode, cd.n,
                                             cd.alpha, cd.p, cd.q);
    frac[i] = av.frac;
    if (!(av.ubar > 0.0) || !(av.sbar > 0.0) || !inSlice(av.slice, c.a))
      fail(cert.sliceMembership, "slice membership");
  }
  if (!cert.partition) return cert;

  // Q^a members strictly between inner and outer, inner excluded.
  auto between = [&](std::size_t inner, std::size_t outer, int a) {
    std::vector<std::size_t> out;
    for (std::ptrdiff_t p = g.parent(inner); p >= 0 && static_cast<std::size_t>(p) != outer;
         p = g.parent(p))
      if (pos[p] >= 0 && cd.cubes[pos[p]].a == a) out.push_back(pos[p]);
    return out;
  };

  for (std::size_t i = 0; i < cd.cubes.size(); ++i) {
    const CoronaCube& c = cd.cubes[i];
    const std::ptrdiff_t ps = pos[c.stop];
    if (ps < 0 || !cd.cubes[ps].stopping || cd.cubes[ps].a != c.a ||
        !g.contains(c.stop, c.cube)) {
      fail(cert.partition, "governing cube is not a stopping cube of the slice");
      continue;
    }
    if (c.stopping) {
      if (c.stop != c.cube) fail(cert.partition, "stopping cube not self-governed");
      if (!c.parentStop) {
        // maximal in Q^a
        for (std::ptrdiff_t p = g.parent(c.cube); p >= 0; p = g.parent(p))
          if (pos[p] >= 0 && cd.cubes[pos[p]].a == c.a)
            fail(cert.stoppingInequality, "generation-0 cube is not maximal");
        if (c.generation != 0) fail(cert.stoppingInequality, "generation index");
      } else {
        const std::ptrdiff_t pp = pos[*c.parentStop];
        if (pp < 0 || !cd.cubes[pp].stopping || cd.cubes[pp].a != c.a ||
            !g.contains(*c.parentStop, c.cube)) {
          fail(cert.stoppingInequality, "stopping parent");
          continue;
        }
        if (!(frac[i] > 2.0 * frac[pp]))
          fail(cert.stoppingInequality, "stopping inequality");
        if (c.generation != cd.cubes[pp].generation + 1)
          fail(cert.stoppingInequality, "generation index");
        for (std::size_t m : between(c.cube, *c.parentStop, c.a)) {
          if (cd.cubes[m].stopping)
            fail(cert.stoppingInequality, "stopping cube between generations");
          if (frac[m] > 2.0 * frac[pp])
            fail(cert.stoppingInequality, "stopping cube is not maximal");
        }
      }
      if (c.b != 1) fail(cert.bSlices, "stopping cube outside b = 1");
    } else {
      if (!(frac[i] <= 2.0 * frac[ps]))
        fail(cert.reverseInequality, "reverse inequality");
      for (std::size_t m : between(c.cube, c.stop, c.a))
        if (cd.cubes[m].stopping && frac[i] <= 2.0 * frac[m])
          fail(cert.reverseInequality, "a smaller stopping cube qualifies");
    }
    if (c.b < 0 || !inBSlice(frac[i], frac[ps], c.b))
      fail(cert.bSlices, "b-slice bounds");
  }
  return cert;
}

std::vector<std::size_t> levelSetCubes(const CoronaDecomposition& cd, int a,
                                       std::size_t P, int b, int k) {
  const DyadicGrid& g = *cd.grid;
  std::vector<int> depth(g.size(), 0);
  std::vector<std::size_t> out;
  for (std::size_t i : cd.governed(a, P, b)) {  // grid order
    const std::size_t q = cd.cubes[i].cube;
    int d = 1;
    for (std::ptrdiff_t p = g.parent(q); p >= 0; p = g.parent(p))
      if (depth[p] > 0) {
        d = depth[p] + 1;
        break;
      }
    depth[q] = d;
    if (d == k + 1) out.push_back(q);
  }
  return out;
}

DecayTable sigmaDecayCheck(const CoronaDecomposition& cd,
                           const StepFunction& sigma, int kmax) {
  DecayTable t;
  const double pp = cd.p / (cd.p - 1.0);
  const double qp = cd.q / (cd.q - 1.0);
  const double an = cd.alpha / cd.n;
  t.gamma = cd.mode == SliceMode::Sobolev ? 1.0 + an * pp / cd.q
                                          : (pp / qp) * (1.0 - an);
  t.constant = std::exp2(pp * (1.0 + 1.0 / cd.q));
  t.asserted = t.gamma >= 1.0 - 1e-12;
  const DyadicGrid& g = *cd.grid;
  const CubeIntegrator is(sigma);
  std::vector<double> worst(kmax + 1, 0.0);
  for (int a : cd.slices) {
    for (std::size_t sp : cd.stopping(a)) {
      const std::size_t P = cd.cubes[sp].cube;
      const double sP = is.integral(g.box(P));
      for (int b : cd.bValues(a, P)) {
        if (!(sP > 0.0)) {
          t.skipped += kmax + 1;
          continue;
        }
        for (int k = 0; k <= kmax; ++k) {
          DecayRow r{a, P, b, k, 0.0, sP, 0.0, t.constant * std::ldexp(1.0, -k)};
          for (std::size_t q : levelSetCubes(cd, a, P, b, k))
            r.sigmaF += is.integral(g.box(q));
          r.ratio = r.sigmaF / sP;
          if (t.asserted && r.ratio > r.bound * (1.0 + 1e-12)) t.ok = false;
          worst[k] = std::max(worst[k], r.ratio);
          t.rows.push_back(r);
        }
      }
    }
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  for (int k = 0; k <= kmax; ++k) {
    if (!(worst[k] > 0.0)) continue;
    const double y = -std::log2(worst[k]);
    sx += k;
    sy += y;
    sxx += double(k) * k;
    sxy += k * y;
    ++cnt;
  }
  t.fittedRate = cnt < 2 ? kNaN : (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
  return t;
}

// --- Carleson ---------------------------------------------------------------

namespace {

// mass[R] = sum of c_Q over Q inside R
std::vector<double> ancestorMass(
    const DyadicGrid& g, std::span<const std::pair<std::size_t, double>> c) {
  std::vector<double> mass(g.size(), 0.0);
  for (const auto& [q, v] : c) {
    if (q >= g.size()) throw std::out_of_range("Carleson: cube index");
    for (std::ptrdiff_t r = static_cast<std::ptrdiff_t>(q); r >= 0; r = g.parent(r))
      mass[r] += v;
  }
  return mass;
}

}  // namespace

CarlesonResult carlesonConstant(const DyadicGrid& grid,
                                std::span<const std::pair<std::size_t, double>> c,
                                const StepFunction& mu,
                                std::optional<std::size_t> root) {
  CarlesonResult out;
  const auto mass = ancestorMass(grid, c);
  const CubeIntegrator im(mu);
  for (std::size_t r = 0; r < grid.size(); ++r) {
    if (root && !grid.contains(*root, r)) continue;
    ++out.checked;
    if (!(mass[r] > 0.0)) continue;
    const double m = im.integral(grid.box(r));
    if (!(m > 0.0)) {
      if (!out.infinite) out.witness = r;
      out.infinite = true;
      out.constant = std::numeric_limits<double>::infinity();
      continue;
    }
    if (!out.infinite && mass[r] / m > out.constant) {
      out.constant = mass[r] / m;
      out.witness = r;
    }
  }
  return out;
}

EmbeddingCheck carlesonEmbedding(const DyadicGrid& grid,
                                 std::span<const std::pair<std::size_t, double>> c,
                                 const StepFunction& mu, const StepFunction& f,
                                 double alpha, double q) {
  EmbeddingCheck out;
  const Mesh& m = grid.mesh();
  const int n = m.dim();
  out.A = carlesonConstant(grid, c, mu).constant;
  const CubeIntegrator im(mu), ifm(f.times(mu));
  std::vector<double> val(grid.size(), 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double mq = im.integral(grid.box(i));
    if (mq > 0.0)
      val[i] = std::pow(mq, alpha / n - 1.0) * ifm.integral(grid.box(i));
  }
  double lhs = 0.0;
  for (const auto& [cube, v] : c) lhs += v * std::pow(val[cube], q);
  out.lhs = std::pow(lhs, 1.0 / q);

  // running max down each chain, then integrate over tick cells
  std::vector<double> chain(grid.size(), 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const std::ptrdiff_t p = grid.parent(i);
    chain[i] = std::max(val[i], p >= 0 ? chain[p] : 0.0);
  }
  const std::int64_t ticks = m.ticksPerSide();
  const std::int64_t N = m.cellsPerSide();
  double norm = 0.0;
  std::array<std::int64_t, 2> x{0, 0};
  for (std::int64_t i = 0; i < ticks; ++i) {
    x[0] = 2 * i + 1;
    for (std::int64_t j = 0; j < (n == 2 ? ticks : 1); ++j) {
      x[1] = 2 * j + 1;
      const std::size_t cell = static_cast<std::size_t>(
          n == 1 ? i / 3 : (i / 3) * N + j / 3);
      if (mu[cell] == 0.0) continue;
      const double M = chain[grid.indexAt(m.finestLevel(), x)];
      norm += std::pow(M, q) * mu[cell];
    }
  }
  norm *= m.cellVolume() / std::pow(3.0, n);
  out.rhs = std::pow(out.A, 1.0 / q) * std::pow(norm, 1.0 / q);
  return out;
}

std::vector<CoronaCarlesonRow> coronaCarleson(const CoronaDecomposition& cd,
                                              const StepFunction& u) {
  const DyadicGrid& g = *cd.grid;
  const CubeIntegrator iu(u);
  std::map<std::size_t, double> fw;  // Fujii-Wilson quotient per grid cube
  std::vector<CoronaCarlesonRow> rows;
  for (int a : cd.slices) {
    std::vector<std::pair<std::size_t, double>> c;
    for (std::size_t i : cd.stopping(a)) {
      const std::size_t q = cd.cubes[i].cube;
      c.emplace_back(q, iu.integral(g.box(q)));
    }
    const auto mass = ancestorMass(g, c);
    CoronaCarlesonRow row;
    row.a = a;
    row.witness = cd.root;
    for (std::size_t P = 0; P < g.size(); ++P) {
      if (!(mass[P] > 0.0) || !g.contains(cd.root, P)) continue;
      const double uP = iu.integral(g.box(P));
      const double A = mass[P] / uP;
      if (A > row.A) {
        row.A = A;
        row.witness = P;
      }
      auto it = fw.find(P);
      if (it == fw.end()) it = fw.emplace(P, fujiiWilsonQuotient(iu, g.box(P))).first;
      row.worstRatio = std::max(row.worstRatio, A / (2.0 * it->second));
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace riesz
