#include "riesz/operators.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace riesz {

namespace {

void checkAlpha(const Mesh& mesh, double alpha) {
  if (!(alpha > 0.0) || !(alpha < mesh.dim()))
    throw std::invalid_argument("alpha must lie in (0, n)");
}

std::vector<double> integrals(const DyadicGrid& g, const CubeIntegrator& integ,
                              Exec exec) {
  return exec == Exec::Serial ? kernels::serial::cubeIntegrals(g, integ)
                              : kernels::omp::cubeIntegrals(g, integ);
}

std::vector<double> chainSum(const DyadicGrid& g, std::span<const double> c,
                             Exec exec) {
  return exec == Exec::Serial ? kernels::serial::chainSum(g, c)
                              : kernels::omp::chainSum(g, c);
}

std::vector<double> chainMax(std::span<const kernels::GridValues> gv,
                             Exec exec) {
  return exec == Exec::Serial ? kernels::serial::chainMax(gv)
                              : kernels::omp::chainMax(gv);
}

// int over [-1/2,1/2]^2 of |y|^{alpha-2} dy, by symmetry 8 times the
// triangle 0 <= theta <= pi/4; composite Simpson on a smooth integrand.
double unitSquareSelfIntegral(double alpha) {
  const int m = 2048;
  const double a = 0.0, b = std::numbers::pi / 4.0, h = (b - a) / m;
  auto g = [alpha](double th) { return std::pow(2.0 * std::cos(th), -alpha); };
  double s = g(a) + g(b);
  for (int i = 1; i < m; ++i) s += (i % 2 ? 4.0 : 2.0) * g(a + i * h);
  return 8.0 / alpha * s * h / 3.0;
}

}  // namespace

std::string toString(KernelMode m) {
  switch (m) {
    case KernelMode::Midpoint: return "midpoint";
    case KernelMode::Lower: return "lower";
    case KernelMode::Upper: return "upper";
  }
  return "midpoint";
}

KernelMode kernelModeFromString(const std::string& s) {
  if (s == "midpoint") return KernelMode::Midpoint;
  if (s == "lower") return KernelMode::Lower;
  if (s == "upper") return KernelMode::Upper;
  throw std::invalid_argument("unknown kernel mode: " + s);
}

double unitBallVolume(int n) { return n == 1 ? 2.0 : std::numbers::pi; }

double kernelWeight(const Mesh& mesh, double alpha, KernelMode mode,
                    std::array<std::int64_t, 2> offset) {
  const int n = mesh.dim();
  const double h = mesh.cellSide();
  const double vol = mesh.cellVolume();
  bool self = true;
  for (int d = 0; d < n; ++d) self = self && offset[d] == 0;
  if (self) {
    switch (mode) {
      case KernelMode::Lower:
        return vol * std::pow(std::sqrt(double(n)) * h / 2.0, alpha - n);
      case KernelMode::Upper: {
        const double w = unitBallVolume(n);
        const double rho = std::pow(vol / w, 1.0 / n);
        return n * w * std::pow(rho, alpha) / alpha;
      }
      case KernelMode::Midpoint:
        if (n == 1) return 2.0 * std::pow(h / 2.0, alpha) / alpha;
        return std::pow(h, alpha) * unitSquareSelfIntegral(alpha);
    }
  }
  double r2 = 0.0;
  for (int d = 0; d < n; ++d) {
    const double a = std::abs(static_cast<double>(offset[d]));
    double t = a;
    if (mode == KernelMode::Lower) t = a + 0.5;
    if (mode == KernelMode::Upper) t = a > 0.0 ? a - 0.5 : 0.0;
    r2 += t * t;
  }
  return vol * std::pow(std::sqrt(r2) * h, alpha - n);
}

kernels::KernelTable kernelTable(const Mesh& mesh, double alpha,
                                 KernelMode mode) {
  kernels::KernelTable t;
  t.n = mesh.dim();
  t.cellsPerSide = mesh.cellsPerSide();
  const std::int64_t N = t.cellsPerSide;
  const std::int64_t w = 2 * N - 1;
  t.weights.resize(static_cast<std::size_t>(t.n == 1 ? w : w * w));
  for (std::int64_t a = -(N - 1); a <= N - 1; ++a) {
    if (t.n == 1) {
      t.weights[static_cast<std::size_t>(a + N - 1)] =
          kernelWeight(mesh, alpha, mode, {a, 0});
      continue;
    }
    for (std::int64_t b = -(N - 1); b <= N - 1; ++b)
      t.weights[static_cast<std::size_t>((a + N - 1) * w + b + N - 1)] =
          kernelWeight(mesh, alpha, mode, {a, b});
  }
  return t;
}

StepFunction rieszReference(const StepFunction& f, double alpha,
                            KernelMode mode, Exec exec) {
  const Mesh& m = f.mesh();
  checkAlpha(m, alpha);
  if (m.cellCount() > kDenseCellCap)
    throw std::invalid_argument("dense reference potential limited to 2^20 cells");
  const auto table = kernelTable(m, alpha, mode);
  auto out = exec == Exec::Serial
                 ? kernels::serial::denseApply(m, f.values(), table)
                 : kernels::omp::denseApply(m, f.values(), table);
  return StepFunction(m, std::move(out));
}

std::vector<double> dyadicCoefficients(const StepFunction& f, double alpha,
                                       const DyadicGrid& grid, Exec exec) {
  checkAlpha(f.mesh(), alpha);
  CubeIntegrator integ(f);
  auto c = integrals(grid, integ, exec);
  const double e = alpha / f.mesh().dim() - 1.0;
  for (std::size_t i = 0; i < c.size(); ++i)
    if (c[i] != 0.0) c[i] *= std::pow(grid.volume(i), e);
  return c;
}

StepFunction dyadicRiesz(const StepFunction& f, double alpha,
                         const DyadicGrid& grid, Exec exec) {
  const auto c = dyadicCoefficients(f, alpha, grid, exec);
  return StepFunction(f.mesh(), chainSum(grid, c, exec));
}

StepFunction dyadicRiesz(const StepFunction& f, double alpha, unsigned shift,
                         Exec exec) {
  return dyadicRiesz(f, alpha, DyadicGrid(f.mesh(), shift), exec);
}

StepFunction sparseRiesz(const StepFunction& f, double alpha,
                         const DyadicGrid& grid,
                         std::span<const std::size_t> members, Exec exec) {
  checkAlpha(f.mesh(), alpha);
  CubeIntegrator integ(f);
  const double e = alpha / f.mesh().dim() - 1.0;
  std::vector<double> c(grid.size(), 0.0);
  for (std::size_t i : members) {
    const double v = integ.integral(grid, i);
    if (v != 0.0) c[i] = v * std::pow(grid.volume(i), e);
  }
  return StepFunction(f.mesh(), chainSum(grid, c, exec));
}

StepFunction restrictedSparseRiesz(const StepFunction& f, double alpha,
                                   const DyadicGrid& grid,
                                   std::span<const std::size_t> members,
                                   std::size_t root, Exec exec) {
  std::vector<std::size_t> inside;
  for (std::size_t i : members)
    if (grid.contains(root, i)) inside.push_back(i);
  return sparseRiesz(f, alpha, grid, inside, exec);
}

StepFunction hlMaximal(const StepFunction& f, Exec exec) {
  const Mesh& m = f.mesh();
  CubeIntegrator integ(f);
  std::vector<DyadicGrid> grids;
  std::vector<std::vector<double>> avgs;
  for (unsigned t = 0; t < m.shiftCount(); ++t) {
    grids.emplace_back(m, t);
    auto c = integrals(grids.back(), integ, exec);
    for (std::size_t i = 0; i < c.size(); ++i) c[i] /= grids.back().volume(i);
    avgs.push_back(std::move(c));
  }
  std::vector<kernels::GridValues> gv;
  for (std::size_t t = 0; t < grids.size(); ++t)
    gv.push_back({&grids[t], avgs[t]});
  return StepFunction(m, chainMax(gv, exec));
}

StepFunction fracMaximalWeighted(const StepFunction& f, const StepFunction& mu,
                                 double alpha, const DyadicGrid& grid,
                                 Exec exec) {
  checkAlpha(f.mesh(), alpha);
  CubeIntegrator fmu(f.times(mu));
  CubeIntegrator mm(mu);
  auto num = integrals(grid, fmu, exec);
  auto den = integrals(grid, mm, exec);
  const double e = alpha / f.mesh().dim() - 1.0;
  for (std::size_t i = 0; i < num.size(); ++i)
    num[i] = den[i] > 0.0 ? num[i] * std::pow(den[i], e) : 0.0;
  kernels::GridValues gv{&grid, num};
  return StepFunction(f.mesh(), chainMax({&gv, 1}, exec));
}

PointwiseComparison comparePointwise(const StepFunction& a,
                                     const StepFunction& b) {
  if (!(a.mesh() == b.mesh())) throw std::invalid_argument("mesh mismatch");
  PointwiseComparison r;
  r.minRatio = std::numeric_limits<double>::infinity();
  r.maxRatio = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (b[i] > 0.0) {
      const double q = a[i] / b[i];
      if (q < r.minRatio) { r.minRatio = q; r.argmin = i; }
      if (q > r.maxRatio) { r.maxRatio = q; r.argmax = i; }
      ++r.compared;
    } else if (a[i] > 0.0) {
      r.violations.push_back(i);
    }
  }
  if (r.compared == 0) r.minRatio = 0.0;
  return r;
}

double dyadicUpperConstant(int n, double alpha) {
  return std::pow(std::sqrt(double(n)), n - alpha) /
         (1.0 - std::pow(2.0, alpha - n));
}

}  // namespace riesz
