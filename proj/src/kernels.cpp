#include "riesz/kernels.hpp"

#include <algorithm>
#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace riesz::kernels {

namespace {

inline double chainSumAt(const DyadicGrid& grid, std::span<const double> coeff,
                         std::size_t cell) {
  const Mesh& m = grid.mesh();
  const auto x = m.cellCenterDoubled(cell);
  double s = 0.0;
  for (int k = m.coarsestLevel(); k <= m.finestLevel(); ++k) {
    const double c = coeff[grid.indexAt(k, x)];
    if (c != 0.0) s += c;
  }
  return s;
}

inline double chainMaxAt(std::span<const GridValues> grids, std::size_t cell) {
  double best = 0.0;
  for (const GridValues& g : grids) {
    const Mesh& m = g.grid->mesh();
    const auto x = m.cellCenterDoubled(cell);
    for (int k = m.coarsestLevel(); k <= m.finestLevel(); ++k)
      best = std::max(best, g.values[g.grid->indexAt(k, x)]);
  }
  return best;
}

inline double denseAt(const Mesh& mesh, std::span<const double> f,
                      const KernelTable& kernel, std::size_t i) {
  const auto N = static_cast<std::size_t>(mesh.cellsPerSide());
  double s = 0.0;
  if (mesh.dim() == 1) {
    const auto ii = static_cast<std::int64_t>(i);
    for (std::size_t j = 0; j < N; ++j)
      if (f[j] != 0.0) s += f[j] * kernel.at(ii - static_cast<std::int64_t>(j), 0);
    return s;
  }
  const auto i0 = static_cast<std::int64_t>(i / N);
  const auto i1 = static_cast<std::int64_t>(i % N);
  for (std::size_t j = 0; j < N * N; ++j) {
    if (f[j] == 0.0) continue;
    const auto j0 = static_cast<std::int64_t>(j / N);
    const auto j1 = static_cast<std::int64_t>(j % N);
    s += f[j] * kernel.at(i0 - j0, i1 - j1);
  }
  return s;
}

}  // namespace

namespace serial {

std::vector<double> cubeIntegrals(const DyadicGrid& grid,
                                  const CubeIntegrator& integ) {
  std::vector<double> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) out[i] = integ.integral(grid, i);
  return out;
}

std::vector<double> chainSum(const DyadicGrid& grid,
                             std::span<const double> coeff) {
  std::vector<double> out(grid.mesh().cellCount());
  for (std::size_t c = 0; c < out.size(); ++c) out[c] = chainSumAt(grid, coeff, c);
  return out;
}

std::vector<double> chainMax(std::span<const GridValues> grids) {
  if (grids.empty()) return {};
  std::vector<double> out(grids.front().grid->mesh().cellCount());
  for (std::size_t c = 0; c < out.size(); ++c) out[c] = chainMaxAt(grids, c);
  return out;
}

std::vector<double> denseApply(const Mesh& mesh, std::span<const double> f,
                               const KernelTable& kernel) {
  std::vector<double> out(mesh.cellCount());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = denseAt(mesh, f, kernel, i);
  return out;
}

}  // namespace serial

namespace omp {

std::vector<double> cubeIntegrals(const DyadicGrid& grid,
                                  const CubeIntegrator& integ) {
  const auto count = static_cast<std::int64_t>(grid.size());
  std::vector<double> out(grid.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < count; ++i)
    out[static_cast<std::size_t>(i)] =
        integ.integral(grid, static_cast<std::size_t>(i));
  return out;
}

std::vector<double> chainSum(const DyadicGrid& grid,
                             std::span<const double> coeff) {
  const auto cells = static_cast<std::int64_t>(grid.mesh().cellCount());
  std::vector<double> out(grid.mesh().cellCount());
#pragma omp parallel for schedule(static)
  for (std::int64_t c = 0; c < cells; ++c)
    out[static_cast<std::size_t>(c)] =
        chainSumAt(grid, coeff, static_cast<std::size_t>(c));
  return out;
}

std::vector<double> chainMax(std::span<const GridValues> grids) {
  if (grids.empty()) return {};
  const auto cells =
      static_cast<std::int64_t>(grids.front().grid->mesh().cellCount());
  std::vector<double> out(static_cast<std::size_t>(cells));
#pragma omp parallel for schedule(static)
  for (std::int64_t c = 0; c < cells; ++c)
    out[static_cast<std::size_t>(c)] =
        chainMaxAt(grids, static_cast<std::size_t>(c));
  return out;
}

std::vector<double> denseApply(const Mesh& mesh, std::span<const double> f,
                               const KernelTable& kernel) {
  const auto cells = static_cast<std::int64_t>(mesh.cellCount());
  std::vector<double> out(mesh.cellCount());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t i = 0; i < cells; ++i)
    out[static_cast<std::size_t>(i)] =
        denseAt(mesh, f, kernel, static_cast<std::size_t>(i));
  return out;
}

}  // namespace omp

int maxThreads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace riesz::kernels
