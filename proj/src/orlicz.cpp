#include "riesz/orlicz.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "riesz/operators.hpp"
#include "riesz/spec_string.hpp"

namespace riesz {

namespace {

constexpr double kE = std::numbers::e;

double conjugate(double p) { return p / (p - 1.0); }

void requireExponent(double p) {
  if (!(p >= 1.0) || !std::isfinite(p))
    throw std::invalid_argument("Young function exponent must be >= 1");
}

void requireDelta(double d) {
  if (!(d >= 0.0) || !std::isfinite(d))
    throw std::invalid_argument("bump parameter must be >= 0");
}

}  // namespace

YoungFunction YoungFunction::power(double p) {
  requireExponent(p);
  YoungFunction y;
  y.kind_ = YoungKind::Power;
  y.p_ = p;
  return y;
}

YoungFunction YoungFunction::logBump(double p, double delta) {
  requireExponent(p);
  requireDelta(delta);
  YoungFunction y;
  y.kind_ = YoungKind::LogBump;
  y.p_ = p;
  y.delta_ = delta;
  return y;
}

YoungFunction YoungFunction::logLogBump(double p, double delta) {
  auto y = logBump(p, delta);
  y.kind_ = YoungKind::LogLogBump;
  return y;
}

YoungFunction YoungFunction::dualLogBump(double p, double delta) {
  auto y = logBump(p, delta);
  if (!(p > 1.0)) throw std::invalid_argument("dual bump needs exponent > 1");
  y.kind_ = YoungKind::DualLogBump;
  return y;
}

YoungFunction YoungFunction::dualLogLogBump(double p, double delta) {
  auto y = dualLogBump(p, delta);
  y.kind_ = YoungKind::DualLogLogBump;
  return y;
}

YoungFunction YoungFunction::numericTable(std::vector<double> t,
                                          std::vector<double> phi) {
  if (t.size() != phi.size() || t.size() < 3)
    throw std::invalid_argument("numeric Young table needs >= 3 samples");
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(t[i] > 0.0) || !(phi[i] > 0.0))
      throw std::invalid_argument("numeric Young table must be positive");
    if (i > 0 && !(t[i] > t[i - 1] && phi[i] > phi[i - 1]))
      throw std::invalid_argument("numeric Young table must increase");
  }
  // convexity through the origin: slopes phi/t and secants nondecreasing
  double prev = phi[0] / t[0];
  for (std::size_t i = 1; i < t.size(); ++i) {
    const double sec = (phi[i] - phi[i - 1]) / (t[i] - t[i - 1]);
    if (sec < prev * (1.0 - 1e-12))
      throw std::invalid_argument("numeric Young table is not convex");
    prev = sec;
  }
  auto tab = std::make_shared<Table>();
  for (std::size_t i = 0; i < t.size(); ++i) {
    tab->logT.push_back(std::log(t[i]));
    tab->logPhi.push_back(std::log(phi[i]));
  }
  const std::size_t k = t.size() - 1;
  const double endSlope = (tab->logPhi[k] - tab->logPhi[k - 1]) /
                          (tab->logT[k] - tab->logT[k - 1]);
  if (!(endSlope > 1.0))
    throw std::invalid_argument("numeric Young table must grow superlinearly");
  YoungFunction y;
  y.kind_ = YoungKind::NumericTable;
  y.p_ = endSlope;
  y.table_ = std::move(tab);
  return y;
}

YoungFunction YoungFunction::numericLegendre(const YoungFunction& base) {
  YoungFunction y;
  y.kind_ = YoungKind::NumericLegendre;
  y.p_ = base.p_ > 1.0 ? conjugate(base.p_) : std::numeric_limits<double>::infinity();
  y.base_ = std::make_shared<YoungFunction>(base);
  return y;
}

YoungFunction YoungFunction::parse(const std::string& spec) {
  const SpecString s = SpecString::parse(spec);
  YoungFunction y;
  if (s.kind == "power") {
    s.requireOnly("p,scale");
    y = power(s.number("p"));
  } else {
    s.requireOnly("p,delta,scale");
    const double p = s.number("p"), d = s.number("delta");
    if (s.kind == "log") y = logBump(p, d);
    else if (s.kind == "loglog") y = logLogBump(p, d);
    else if (s.kind == "duallog") y = dualLogBump(p, d);
    else if (s.kind == "dualloglog") y = dualLogLogBump(p, d);
    else throw std::invalid_argument("unknown Young function kind: " + s.kind);
  }
  if (s.has("scale")) y = y.scaled(s.number("scale"));
  return y;
}

YoungFunction YoungFunction::scaled(double c) const {
  if (!(c > 0.0)) throw std::invalid_argument("scale must be positive");
  YoungFunction y = *this;
  y.scale_ *= c;
  return y;
}

std::string YoungFunction::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind_) {
    case YoungKind::Power: os << "power:p=" << p_; break;
    case YoungKind::LogBump: os << "log:p=" << p_ << ",delta=" << delta_; break;
    case YoungKind::LogLogBump:
      os << "loglog:p=" << p_ << ",delta=" << delta_;
      break;
    case YoungKind::DualLogBump:
      os << "duallog:p=" << p_ << ",delta=" << delta_;
      break;
    case YoungKind::DualLogLogBump:
      os << "dualloglog:p=" << p_ << ",delta=" << delta_;
      break;
    case YoungKind::NumericTable: os << "table:n=" << table_->logT.size(); break;
    case YoungKind::NumericLegendre:
      os << "legendre(" << base_->describe() << ")";
      break;
  }
  if (scale_ != 1.0) os << ",scale=" << scale_;
  return os.str();
}

double YoungFunction::operator()(double t) const {
  if (!(t > 0.0)) return 0.0;
  return scale_ * raw(t);
}

double YoungFunction::raw(double t) const {
  switch (kind_) {
    case YoungKind::Power: return std::pow(t, p_);
    case YoungKind::LogBump:
      return std::pow(t, p_) * std::pow(std::log(kE + t), p_ - 1.0 + delta_);
    case YoungKind::LogLogBump:
      return std::pow(t, p_) * std::pow(std::log(kE + t), p_ - 1.0) *
             std::pow(std::log(std::log(std::exp(kE) + t)), p_ - 1.0 + delta_);
    case YoungKind::DualLogBump:
      return std::pow(t, p_) * std::pow(std::log(kE + t), -1.0 - delta_);
    case YoungKind::DualLogLogBump:
      return std::pow(t, p_) / std::log(kE + t) *
             std::pow(std::log(std::log(std::exp(kE) + t)), -1.0 - delta_);
    case YoungKind::NumericTable: return tableEval(t);
    case YoungKind::NumericLegendre: return legendreEval(t);
  }
  return 0.0;
}

double YoungFunction::tableEval(double t) const {
  const auto& lt = table_->logT;
  const auto& lp = table_->logPhi;
  const double x = std::log(t);
  std::size_t k;
  if (x <= lt.front()) k = 0;
  else if (x >= lt.back()) k = lt.size() - 2;
  else k = static_cast<std::size_t>(
               std::upper_bound(lt.begin(), lt.end(), x) - lt.begin()) - 1;
  const double slope = (lp[k + 1] - lp[k]) / (lt[k + 1] - lt[k]);
  return std::exp(lp[k] + slope * (x - lt[k]));
}

double YoungFunction::legendreEval(double t) const {
  const YoungFunction& b = *base_;
  auto obj = [&](double s) { return s * t - b(s); };
  // find S beyond the maximizer: obj(S) < 0 and obj decreasing there
  double hi = 1.0;
  int guard = 0;
  while (obj(hi) >= 0.0 && guard++ < 4000) hi *= 2.0;
  if (guard >= 4000) return std::numeric_limits<double>::infinity();
  double lo = 0.0;
  for (int it = 0; it < 200; ++it) {
    const double m1 = lo + (hi - lo) / 3.0;
    const double m2 = hi - (hi - lo) / 3.0;
    if (obj(m1) < obj(m2)) lo = m1;
    else hi = m2;
  }
  return std::max(0.0, obj(0.5 * (lo + hi)));
}

double YoungFunction::inverse(double y) const {
  if (!(y > 0.0)) return 0.0;
  double lo = 0.0, hi = 1.0;
  while ((*this)(hi) < y) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) throw std::runtime_error("Young inverse overflow");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if ((*this)(mid) < y) lo = mid;
    else hi = mid;
  }
  return hi;
}

YoungFunction YoungFunction::associate() const {
  switch (kind_) {
    case YoungKind::Power: {
      if (!(p_ > 1.0)) throw std::invalid_argument("t^1 has no finite associate");
      const double q = conjugate(p_);
      // c s^p  ->  c^{1-q} (p-1) p^{-q} t^q
      const double c = std::pow(scale_, 1.0 - q) * (p_ - 1.0) * std::pow(p_, -q);
      return power(q).scaled(c);
    }
    case YoungKind::LogBump:
      return dualLogBump(conjugate(p_), delta_ / (p_ - 1.0));
    case YoungKind::LogLogBump:
      return dualLogLogBump(conjugate(p_), delta_ / (p_ - 1.0));
    case YoungKind::DualLogBump:
      return logBump(conjugate(p_), delta_ * (conjugate(p_) - 1.0));
    case YoungKind::DualLogLogBump:
      return logLogBump(conjugate(p_), delta_ * (conjugate(p_) - 1.0));
    case YoungKind::NumericLegendre:
      return *base_;
    case YoungKind::NumericTable:
      return numericLegendre(*this);
  }
  return *this;
}

bool isYoungOnGrid(const YoungFunction& phi, double tmin, double tmax,
                   int samples) {
  const double step = std::log(tmax / tmin) / samples;
  double prevT = 0.0, prevV = 0.0, prevSlope = 0.0, prevRatio = 0.0;
  for (int i = 0; i <= samples; ++i) {
    const double t = tmin * std::exp(step * i);
    const double v = phi(t);
    if (!(v > prevV)) return false;
    const double slope = (v - prevV) / (t - prevT);
    if (slope < prevSlope * (1.0 - 1e-9)) return false;
    if (v / t < prevRatio * (1.0 - 1e-12)) return false;
    prevT = t;
    prevV = v;
    prevSlope = slope;
    prevRatio = v / t;
  }
  return true;
}

// ---------------------------------------------------------------------------

CubeDistribution cubeDistribution(const StepFunction& f, const TickBox& box) {
  const Mesh& m = f.mesh();
  CubeDistribution d;
  const double total = toDouble(m.measure(box));
  forEachCellIn(m, box, [&](std::size_t cell, std::int64_t overlap) {
    d.values.push_back(f[cell]);
    d.weights.push_back(static_cast<double>(overlap) / total);
  });
  return d;
}

CubeDistribution cubeDistribution(const StepFunction& f, const DyadicGrid& g,
                                  std::size_t i) {
  return cubeDistribution(f, g.box(i));
}

double luxemburgNorm(const CubeDistribution& d, const YoungFunction& phi,
                     const LuxemburgOptions& opt) {
  double vmax = 0.0;
  for (std::size_t i = 0; i < d.values.size(); ++i)
    if (d.weights[i] > 0.0) vmax = std::max(vmax, d.values[i]);
  if (vmax == 0.0) return 0.0;
  auto G = [&](double lambda) {
    double s = 0.0;
    for (std::size_t i = 0; i < d.values.size(); ++i)
      if (d.values[i] > 0.0) s += d.weights[i] * phi(d.values[i] / lambda);
    return s;
  };
  // G is decreasing; G(vmax / Phi^{-1}(1)) <= 1.
  double hi = vmax / phi.inverse(1.0);
  int guard = 0;
  while (G(hi) > 1.0) {
    hi *= 2.0;
    if (++guard > 2000) throw std::runtime_error("Luxemburg bracket failed");
  }
  double lo = hi;
  guard = 0;
  while (G(lo) <= 1.0) {
    hi = lo;
    lo *= 0.5;
    if (++guard > 2000) throw std::runtime_error("Luxemburg bracket failed");
  }
  int it = 0;
  for (; it < opt.maxIterations && hi / lo - 1.0 > opt.relTol; ++it) {
    const double mid = std::sqrt(lo * hi);
    if (G(mid) > 1.0) lo = mid;
    else hi = mid;
  }
  if (hi / lo - 1.0 > opt.relTol)
    throw std::runtime_error("Luxemburg bisection did not converge");
  return hi;
}

double luxemburgNorm(const StepFunction& f, const DyadicGrid& g, std::size_t i,
                     const YoungFunction& phi, const LuxemburgOptions& opt) {
  return luxemburgNorm(cubeDistribution(f, g, i), phi, opt);
}

// ---------------------------------------------------------------------------

BpVerdict bpCheck(const YoungFunction& phi, double p) {
  if (!(p > 1.0)) throw std::invalid_argument("B_p check needs p > 1");
  BpVerdict v;
  const double q = phi.exponent(), d = phi.delta();
  switch (phi.kind()) {
    case YoungKind::Power: v.r = q; break;
    case YoungKind::LogBump: v.r = q; v.a = q - 1.0 + d; break;
    case YoungKind::LogLogBump:
      v.r = q; v.a = q - 1.0; v.b = q - 1.0 + d;
      break;
    case YoungKind::DualLogBump: v.r = q; v.a = -1.0 - d; break;
    case YoungKind::DualLogLogBump: v.r = q; v.a = -1.0; v.b = -1.0 - d; break;
    case YoungKind::NumericTable:
    case YoungKind::NumericLegendre: {
      const double t1 = 1e10, t2 = 1e12;
      v.r = std::log(phi(t2) / phi(t1)) / std::log(t2 / t1);
      v.unreliable = true;
      break;
    }
  }
  const double eps = 1e-12;
  if (v.r < p - eps) v.finite = true;
  else if (v.r > p + eps) v.finite = false;
  else if (v.a < -1.0 - eps) v.finite = true;
  else if (v.a > -1.0 + eps) v.finite = false;
  else v.finite = v.b < -1.0 - eps;
  if (v.unreliable) v.finite = v.r < p - 1e-3;
  {
    const double t1 = 1e10, t2 = 1e12;
    v.tailSlope = std::log((phi(t2) / std::pow(t2, p)) /
                           (phi(t1) / std::pow(t1, p))) /
                  std::log(t2 / t1);
  }
  // int_0^{ln 1e12} Phi(e^s) e^{-ps} ds, composite Simpson
  const int m = 4000;
  const double S = std::log(1e12), h = S / m;
  auto g = [&](double s) { return phi(std::exp(s)) * std::exp(-p * s); };
  double acc = g(0.0) + g(S);
  for (int i = 1; i < m; ++i) acc += (i % 2 ? 4.0 : 2.0) * g(i * h);
  v.integralToCutoff = acc * h / 3.0;
  return v;
}

// ---------------------------------------------------------------------------

StepFunction orliczMaximal(const StepFunction& f, const YoungFunction& phi,
                           kernels::Exec exec) {
  const Mesh& m = f.mesh();
  std::vector<DyadicGrid> grids;
  std::vector<std::vector<double>> norms;
  for (unsigned t = 0; t < m.shiftCount(); ++t) {
    grids.emplace_back(m, t);
    const DyadicGrid& g = grids.back();
    std::vector<double> v(g.size());
    const auto count = static_cast<std::int64_t>(g.size());
    if (exec == kernels::Exec::Serial) {
      for (std::int64_t i = 0; i < count; ++i)
        v[i] = luxemburgNorm(f, g, static_cast<std::size_t>(i), phi);
    } else {
#pragma omp parallel for schedule(dynamic, 8)
      for (std::int64_t i = 0; i < count; ++i)
        v[i] = luxemburgNorm(f, g, static_cast<std::size_t>(i), phi);
    }
    norms.push_back(std::move(v));
  }
  std::vector<kernels::GridValues> gv;
  for (std::size_t t = 0; t < grids.size(); ++t)
    gv.push_back({&grids[t], norms[t]});
  return StepFunction(m, exec == kernels::Exec::Serial
                             ? kernels::serial::chainMax(gv)
                             : kernels::omp::chainMax(gv));
}

HolderPair generalizedHolder(const StepFunction& f, const StepFunction& g,
                             const DyadicGrid& grid, std::size_t i,
                             const YoungFunction& phi) {
  HolderPair h;
  h.lhs = CubeIntegrator(f.times(g)).integral(grid, i) / grid.volume(i);
  // powers pair with the plain L^{p'} gauge, which dominates the exact
  // associate; everything else uses the numeric transform
  const YoungFunction assoc =
      phi.kind() == YoungKind::Power
          ? YoungFunction::power(phi.exponent() / (phi.exponent() - 1.0))
          : phi.numericAssociate();
  h.rhs = 2.0 * luxemburgNorm(f, grid, i, phi) *
          luxemburgNorm(g, grid, i, assoc);
  return h;
}

// ---------------------------------------------------------------------------

GapFit crvGapCheck(const StepFunction& u, double q, double delta,
                   const CubeCorpus& corpus, GapMode mode, double bound) {
  GapFit fit;
  fit.mode = mode;
  fit.bound = bound;
  const YoungFunction phi = mode == GapMode::Log
                                ? YoungFunction::logBump(q, delta)
                                : YoungFunction::logLogBump(q, delta);
  const YoungFunction phi0 = mode == GapMode::Log
                                 ? YoungFunction::logBump(q, delta / 2.0)
                                 : YoungFunction::logLogBump(q, delta / 2.0);
  const YoungFunction pq = YoungFunction::power(q);
  const StepFunction v = u.power(1.0 / q);
  for (const CubeRef& c : corpus.cubes()) {
    const auto d = cubeDistribution(v, corpus.box(c));
    GapTriple t;
    t.cube = c;
    t.n0 = luxemburgNorm(d, phi0);
    if (t.n0 == 0.0) {
      ++fit.skipped;
      continue;
    }
    t.nPhi = luxemburgNorm(d, phi);
    t.nq = luxemburgNorm(d, pq);
    fit.triples.push_back(t);
  }
  if (fit.triples.empty()) return fit;

  auto constantFor = [&](double param) {
    double worst = 0.0;
    for (const auto& t : fit.triples) {
      double rhs;
      if (mode == GapMode::Log) {
        rhs = std::pow(t.nPhi, 1.0 - param) * std::pow(t.nq, param);
      } else {
        const double ratio = std::min(1.0, t.nq / t.nPhi);
        rhs = t.nPhi * std::pow(std::log(std::exp(fit.logC) / ratio), -param);
      }
      worst = std::max(worst, t.n0 / rhs);
    }
    return worst;
  };
  const int steps = mode == GapMode::Log ? 99 : 1000;
  for (int s = 1; s <= steps; ++s) {
    const double param = 0.01 * s;
    const double c = constantFor(param);
    if (c <= bound) {
      fit.feasible = true;
      fit.parameter = param;
      fit.constant = c;
    }
  }
  return fit;
}

}  // namespace riesz
