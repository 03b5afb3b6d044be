#pragma once

#include <span>
#include <vector>

#include "riesz/mesh.hpp"

// Data-parallel inner loops. Every kernel exists twice: a plain serial loop
// kept as the reference, and an OpenMP version that must agree with it bit
// for bit (each output cell is produced by one thread in a fixed order).
namespace riesz::kernels {

enum class Exec { Serial, Parallel };

/// Per-cube values of one grid, for chain maxima across several grids.
struct GridValues {
  const DyadicGrid* grid;
  std::span<const double> values;
};

/// Translation-invariant weights w(offset) on a (2N-1)^n offset lattice.
struct KernelTable {
  int n = 1;
  std::int64_t cellsPerSide = 0;
  std::vector<double> weights;

  double at(std::int64_t d0, std::int64_t d1) const {
    const std::int64_t w = 2 * cellsPerSide - 1;
    const std::int64_t i0 = d0 + cellsPerSide - 1;
    if (n == 1) return weights[static_cast<std::size_t>(i0)];
    return weights[static_cast<std::size_t>(i0 * w + d1 + cellsPerSide - 1)];
  }
};

namespace serial {
std::vector<double> cubeIntegrals(const DyadicGrid& grid,
                                  const CubeIntegrator& integ);
/// out[c] = sum over levels (coarse to fine) of coeff[cube containing c].
std::vector<double> chainSum(const DyadicGrid& grid,
                             std::span<const double> coeff);
/// out[c] = max over the listed grids and all levels of the cube value.
std::vector<double> chainMax(std::span<const GridValues> grids);
/// out[i] = sum_j f[j] * w(i - j).
std::vector<double> denseApply(const Mesh& mesh, std::span<const double> f,
                               const KernelTable& kernel);
}  // namespace serial

namespace omp {
std::vector<double> cubeIntegrals(const DyadicGrid& grid,
                                  const CubeIntegrator& integ);
std::vector<double> chainSum(const DyadicGrid& grid,
                             std::span<const double> coeff);
std::vector<double> chainMax(std::span<const GridValues> grids);
std::vector<double> denseApply(const Mesh& mesh, std::span<const double> f,
                               const KernelTable& kernel);
}  // namespace omp

int maxThreads();

}  // namespace riesz::kernels
