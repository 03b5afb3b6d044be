#include "riesz/weights.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "riesz/spec_string.hpp"

namespace riesz {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max(1.0, std::abs(b));
}

// avg over every corpus cube of g(w), summing cell by cell; the part of a
// cube outside the base box sees w = 0
template <class G>
std::vector<double> averagesOf(const StepFunction& w, const CubeCorpus& corpus,
                               Exec exec, G g) {
  const Mesh& m = w.mesh();
  const auto vals = w.values();
  const double g0 = g(0.0);
  std::vector<double> out(corpus.size());
  const auto count = static_cast<std::int64_t>(corpus.size());
#pragma omp parallel for schedule(dynamic, 16) if (exec == Exec::Parallel)
  for (std::int64_t k = 0; k < count; ++k) {
    const CubeRef& c = corpus[static_cast<std::size_t>(k)];
    double acc = 0.0;
    std::int64_t covered = 0;
    forEachCellIn(m, corpus.box(c), [&](std::size_t cell, std::int64_t ov) {
      acc += g(vals[cell]) * static_cast<double>(ov);
      covered += ov;
    });
    const double total = toDouble(corpus.measure(c));
    const double outside = total - static_cast<double>(covered);
    if (outside > 0.0 && g0 != 0.0) acc += g0 * outside;
    out[static_cast<std::size_t>(k)] = acc / total;
  }
  return out;
}

CharacteristicReport supremum(std::string name, std::vector<double> perCube,
                              const CubeCorpus& corpus) {
  CharacteristicReport r;
  r.name = std::move(name);
  r.corpusSize = corpus.size();
  for (std::size_t i = 0; i < perCube.size(); ++i) {
    const double v = perCube[i];
    if (std::isnan(v)) {
      ++r.skipped;
      continue;
    }
    if (!r.witness || v > r.value) {
      r.value = v;
      r.witness = corpus[i];
    }
  }
  if (r.witness) r.witnessCube = corpus.cube(*r.witness);
  r.perCube = std::move(perCube);
  return r;
}

template <class F>
std::vector<double> perCubeMap(std::size_t count, Exec exec, F f) {
  std::vector<double> out(count);
  const auto c = static_cast<std::int64_t>(count);
#pragma omp parallel for schedule(dynamic, 4) if (exec == Exec::Parallel)
  for (std::int64_t k = 0; k < c; ++k)
    out[static_cast<std::size_t>(k)] = f(static_cast<std::size_t>(k));
  return out;
}

void requireSameMesh(const StepFunction& a, const StepFunction& b) {
  if (!(a.mesh() == b.mesh()))
    throw std::invalid_argument("weights live on different meshes");
}

}  // namespace

// ---------------------------------------------------------------------------

ExponentTuple::ExponentTuple(int n, double alpha, double p, double q)
    : n_(n), alpha_(alpha), p_(p), q_(q) {
  if (n < 1) throw std::invalid_argument("dimension must be >= 1");
  if (!(alpha > 0.0 && alpha < n))
    throw std::invalid_argument("alpha must lie in (0, n)");
  if (!(p > 1.0) || !std::isfinite(p))
    throw std::invalid_argument("p must lie in (1, inf)");
  if (!(q >= p) || !std::isfinite(q))
    throw std::invalid_argument("q must satisfy p <= q < inf");
  sp_ = 1.0 + q / pPrime();
  sq_ = 1.0 + pPrime() / q;
  if (!close(sp_ / (sp_ - 1.0), sq_, kTol))
    throw std::logic_error("s(p)' != s(q')");
  sobolev_ = std::abs(1.0 / p - 1.0 / q - alpha / n) <= kTol;
  if (sobolev_) {
    if (!close(sp_, q * (1.0 - alpha / n), kTol) ||
        !close(sp_, p * (n - alpha) / (n - alpha * p), kTol))
      throw std::logic_error("s(p) identities fail under the Sobolev relation");
  }
}

ExponentTuple ExponentTuple::sobolev(int n, double alpha, double p) {
  if (!(alpha * p < n))
    throw std::invalid_argument("Sobolev exponent needs alpha * p < n");
  return ExponentTuple(n, alpha, p, 1.0 / (1.0 / p - alpha / n));
}

RangeFlags rangeConditions(const ExponentTuple& e) {
  RangeFlags f;
  const double gain = 1.0 - e.alpha() / e.n();
  const double ratio = e.pPrime() / e.qPrime();
  f.weakValue = ratio * gain;
  f.strongValue = std::min(e.q() / e.p(), ratio) * gain;
  // slack for rounding in the products
  f.weak = f.weakValue >= 1.0 - 1e-12;
  f.strong = f.strongValue >= 1.0 - 1e-12;
  return f;
}

// ---------------------------------------------------------------------------

std::vector<double> corpusPowerAverages(const StepFunction& w, double e,
                                        const CubeCorpus& corpus, Exec exec) {
  if (e == 1.0) return averagesOf(w, corpus, exec, [](double v) { return v; });
  return averagesOf(w, corpus, exec,
                    [e](double v) { return std::pow(v, e); });
}

std::vector<double> corpusNegLogAverages(const StepFunction& w,
                                         const CubeCorpus& corpus, Exec exec) {
  return averagesOf(w, corpus, exec, [](double v) {
    return v > 0.0 ? -std::log(v) : kInf;
  });
}

CharacteristicReport apConstant(const StepFunction& w, double p,
                                const CubeCorpus& corpus, Exec exec) {
  if (!(p > 1.0)) throw std::invalid_argument("A_p needs p > 1");
  const double pp = p / (p - 1.0);
  const auto a = corpusPowerAverages(w, 1.0, corpus, exec);
  const auto b = corpusPowerAverages(w, 1.0 - pp, corpus, exec);
  std::vector<double> v(a.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = a[i] == 0.0 ? kNaN : a[i] * std::pow(b[i], p - 1.0);
  return supremum("A_p", std::move(v), corpus);
}

CharacteristicReport apConstant(const StepFunction& w, double p) {
  return apConstant(w, p, CubeCorpus::insideBox(w.mesh()));
}

CharacteristicReport apqConstant(const StepFunction& w, double p, double q,
                                 const CubeCorpus& corpus, Exec exec) {
  if (!(p > 1.0) || !(q >= p))
    throw std::invalid_argument("A_{p,q} needs 1 < p <= q");
  const double pp = p / (p - 1.0);
  const auto a = corpusPowerAverages(w, q, corpus, exec);
  const auto b = corpusPowerAverages(w, -pp, corpus, exec);
  std::vector<double> v(a.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = a[i] == 0.0 ? kNaN
                       : std::pow(a[i], 1.0 / q) * std::pow(b[i], 1.0 / pp);
  return supremum("A_pq", std::move(v), corpus);
}

CharacteristicReport apqConstant(const StepFunction& w, double p, double q) {
  return apqConstant(w, p, q, CubeCorpus::insideBox(w.mesh()));
}

CharacteristicReport twoWeightAp(const StepFunction& u,
                                 const StepFunction& sigma, double r,
                                 const CubeCorpus& corpus, Exec exec) {
  requireSameMesh(u, sigma);
  if (!(r > 1.0)) throw std::invalid_argument("two-weight A_r needs r > 1");
  const auto a = corpusPowerAverages(u, 1.0, corpus, exec);
  const auto b = corpusPowerAverages(sigma, 1.0, corpus, exec);
  std::vector<double> v(a.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = a[i] * std::pow(b[i], r - 1.0);
  return supremum("two_weight_A_r", std::move(v), corpus);
}

CharacteristicReport twoWeightAp(const StepFunction& u,
                                 const StepFunction& sigma, double r) {
  return twoWeightAp(u, sigma, r, CubeCorpus::insideBox(u.mesh()));
}

double fujiiWilsonQuotient(const CubeIntegrator& integ, const TickBox& q) {
  const Mesh& m = integ.mesh();
  const int n = m.dim();
  const double wq = integ.tickIntegral(q);
  if (!(wq > 0.0)) return kNaN;
  double acc = 0.0;
  std::array<std::int64_t, 2> x{0, 0};
  auto visit = [&] {
    double best = 0.0;
    for (unsigned t = 0; t < m.shiftCount(); ++t) {
      for (int lev = m.finestLevel(); lev >= m.coarsestLevel(); --lev) {
        const TickBox r = m.bounds(m.locate(t, lev, x));
        const double mr = toDouble(m.measure(r));
        if (containsBox(r, q, n)) {
          // coarser cubes of this grid contain Q too and only shrink
          best = std::max(best, wq / mr);
          break;
        }
        const TickBox cut = intersect(r, q, n);
        if (!isEmpty(cut, n)) best = std::max(best, integ.tickIntegral(cut) / mr);
      }
    }
    acc += best;
  };
  for (std::int64_t i = q.lo[0]; i < q.hi[0]; ++i) {
    x[0] = 2 * i + 1;
    if (n == 1) {
      visit();
      continue;
    }
    for (std::int64_t j = q.lo[1]; j < q.hi[1]; ++j) {
      x[1] = 2 * j + 1;
      visit();
    }
  }
  return acc / wq;
}

CharacteristicReport fujiiWilson(const StepFunction& w,
                                 const CubeCorpus& corpus, Exec exec) {
  const CubeIntegrator integ(w);
  auto one = [&](std::size_t k) {
    return fujiiWilsonQuotient(integ, corpus.box(corpus[k]));
  };
  return supremum("fujii_wilson", perCubeMap(corpus.size(), exec, one), corpus);
}

CharacteristicReport fujiiWilson(const StepFunction& w) {
  return fujiiWilson(w, CubeCorpus::insideBox(w.mesh()));
}

CharacteristicReport ainftyExp(const StepFunction& w, const CubeCorpus& corpus,
                               Exec exec) {
  const auto a = corpusPowerAverages(w, 1.0, corpus, exec);
  const auto l = corpusNegLogAverages(w, corpus, exec);
  std::vector<double> v(a.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = a[i] == 0.0 ? kNaN : std::exp(l[i]) * a[i];
  return supremum("A_inf_exp", std::move(v), corpus);
}

CharacteristicReport ainftyExp(const StepFunction& w) {
  return ainftyExp(w, CubeCorpus::insideBox(w.mesh()));
}

CharacteristicReport mixedApqAlpha(const StepFunction& u,
                                   const StepFunction& sigma,
                                   const ExponentTuple& e,
                                   const CubeCorpus& corpus, Exec exec) {
  requireSameMesh(u, sigma);
  const auto a = corpusPowerAverages(u, 1.0, corpus, exec);
  const auto b = corpusPowerAverages(sigma, 1.0, corpus, exec);
  std::vector<double> v(a.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = std::pow(corpus.volume(corpus[i]), e.cubeExponent()) *
           std::pow(a[i], 1.0 / e.q()) * std::pow(b[i], 1.0 / e.pPrime());
  return supremum("mixed_A_pq_alpha", std::move(v), corpus);
}

CharacteristicReport mixedApqAlpha(const StepFunction& u,
                                   const StepFunction& sigma,
                                   const ExponentTuple& e) {
  return mixedApqAlpha(u, sigma, e, CubeCorpus::insideBox(u.mesh()));
}

CharacteristicReport bumpConstant(const StepFunction& u,
                                  const StepFunction& sigma,
                                  const ExponentTuple& e,
                                  const YoungFunction& phi,
                                  const std::optional<YoungFunction>& psi,
                                  const CubeCorpus& corpus, Exec exec) {
  requireSameMesh(u, sigma);
  const YoungFunction psiUsed = psi ? *psi : YoungFunction::power(e.pPrime());
  const StepFunction uq = u.power(1.0 / e.q());
  const StepFunction sp = sigma.power(1.0 / e.pPrime());
  auto one = [&](std::size_t k) {
    const TickBox& b = corpus.box(corpus[k]);
    const double nu = luxemburgNorm(cubeDistribution(uq, b), phi);
    const double ns = luxemburgNorm(cubeDistribution(sp, b), psiUsed);
    return std::pow(corpus.volume(corpus[k]), e.cubeExponent()) * nu * ns;
  };
  return supremum("bump", perCubeMap(corpus.size(), exec, one), corpus);
}

CharacteristicReport bumpConstant(const StepFunction& u,
                                  const StepFunction& sigma,
                                  const ExponentTuple& e,
                                  const YoungFunction& phi,
                                  const std::optional<YoungFunction>& psi) {
  return bumpConstant(u, sigma, e, phi, psi, CubeCorpus::insideBox(u.mesh()));
}

// ---------------------------------------------------------------------------

namespace {

double positive(const SpecString& s, const std::string& key, double fallback) {
  const double v = s.number(key, fallback);
  if (!(v > 0.0) || !std::isfinite(v))
    throw std::invalid_argument(s.kind + ": " + key + " must be positive");
  return v;
}

std::int64_t integer(const SpecString& s, const std::string& key) {
  const double v = s.number(key);
  if (v != std::floor(v) || std::abs(v) > 9e15)
    throw std::invalid_argument(s.kind + ": " + key + " must be an integer");
  return static_cast<std::int64_t>(v);
}

std::vector<double> martingale(const Mesh& m, std::uint64_t seed, double vol) {
  std::mt19937_64 rng(seed);
  const int n = m.dim();
  const std::size_t children = std::size_t{1} << n;
  std::vector<double> cur(1, 1.0);
  std::int64_t side = 1;
  std::vector<double> eps(children);
  for (int k = -m.baseExponent(); k < m.finestLevel(); ++k) {
    const std::int64_t next = 2 * side;
    std::vector<double> out(static_cast<std::size_t>(n == 1 ? next : next * next));
    for (std::size_t c = 0; c < cur.size(); ++c) {
      double mean = 0.0;
      for (double& x : eps) {
        x = 2.0 * std::ldexp(static_cast<double>(rng() >> 11), -53) - 1.0;
        mean += x;
      }
      mean /= static_cast<double>(children);
      const auto ci = static_cast<std::int64_t>(c);
      for (std::size_t j = 0; j < children; ++j) {
        const double v = cur[c] * (1.0 + vol * (eps[j] - mean));
        if (n == 1) {
          out[static_cast<std::size_t>(2 * ci + static_cast<std::int64_t>(j))] = v;
        } else {
          const std::int64_t r = 2 * (ci / side) + static_cast<std::int64_t>(j >> 1);
          const std::int64_t s = 2 * (ci % side) + static_cast<std::int64_t>(j & 1);
          out[static_cast<std::size_t>(r * next + s)] = v;
        }
      }
    }
    cur = std::move(out);
    side = next;
  }
  return cur;
}

}  // namespace

StepFunction generateWeight(const Mesh& mesh, const std::string& spec) {
  const SpecString s = SpecString::parse(spec);
  const int n = mesh.dim();
  std::vector<double> v(mesh.cellCount());
  auto fill = [&](auto fn) {
    for (std::size_t c = 0; c < v.size(); ++c) v[c] = fn(mesh.cellCenter(c));
  };
  if (s.kind == "constant") {
    s.requireOnly("c");
    const double c = positive(s, "c", 1.0);
    fill([&](auto) { return c; });
  } else if (s.kind == "power" || s.kind == "powerWeight") {
    s.requireOnly("center,cy,beta,floor");
    const double cx = s.number("center", 0.5);
    const double cy = s.number("cy", cx);
    const double beta = s.number("beta");
    if (!(beta > -n))
      throw std::invalid_argument("power: beta <= -n is not locally integrable");
    double floor = mesh.cellSide();
    if (s.has("floor") && s.args.at("floor") != "auto")
      floor = positive(s, "floor", floor);
    fill([&](std::array<double, 2> x) {
      double d2 = (x[0] - cx) * (x[0] - cx);
      if (n == 2) d2 += (x[1] - cy) * (x[1] - cy);
      return std::pow(std::max(std::sqrt(d2), floor), beta);
    });
  } else if (s.kind == "twovalue" || s.kind == "twoValue") {
    s.requireOnly("a,b,split");
    const double a = positive(s, "a", 2.0), b = s.number("b", 1.0);
    if (!(b >= 0.0) || !std::isfinite(b))
      throw std::invalid_argument("twovalue: b must be nonnegative");
    const double split = s.number("split", 0.5);
    fill([&](std::array<double, 2> x) { return x[0] < split ? a : b; });
  } else if (s.kind == "martingale" || s.kind == "dyadicMartingale") {
    s.requireOnly("seed,vol");
    const std::int64_t seed = integer(s, "seed");
    const double vol = s.number("vol", 0.3);
    if (!(vol >= 0.0 && vol < 0.5))
      throw std::invalid_argument("martingale: vol must lie in [0, 1/2)");
    v = martingale(mesh, static_cast<std::uint64_t>(seed), vol);
  } else if (s.kind == "checkerboard") {
    s.requireOnly("levels,ratio");
    const std::int64_t k = integer(s, "levels");
    if (k < -mesh.baseExponent() || k > mesh.finestLevel())
      throw std::invalid_argument("checkerboard: level outside the mesh");
    const double ratio = positive(s, "ratio", 4.0);
    const double scale = std::ldexp(1.0, static_cast<int>(k));
    fill([&](std::array<double, 2> x) {
      std::int64_t parity = static_cast<std::int64_t>(std::floor(x[0] * scale));
      if (n == 2) parity += static_cast<std::int64_t>(std::floor(x[1] * scale));
      return parity % 2 != 0 ? ratio : 1.0;
    });
  } else {
    throw std::invalid_argument("unknown weight kind: " + s.kind);
  }
  return StepFunction(mesh, std::move(v));
}

}  // namespace riesz
