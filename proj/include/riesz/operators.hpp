#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "riesz/kernels.hpp"
#include "riesz/mesh.hpp"

namespace riesz {

using kernels::Exec;

/// Discrete surrogate for the integral of |x - y|^{alpha-n} over a source cell.
///  midpoint: center-to-center distance, exact integral on the self cell
///  lower:    farthest point of the source cell
///  upper:    nearest point; equal-volume ball on the self cell
enum class KernelMode { Midpoint, Lower, Upper };

std::string toString(KernelMode m);
KernelMode kernelModeFromString(const std::string& s);

/// Largest number of cells accepted by the dense reference potential.
inline constexpr std::size_t kDenseCellCap = std::size_t{1} << 20;

/// Weight of one source cell at integer cell offset d (target minus source).
double kernelWeight(const Mesh& mesh, double alpha, KernelMode mode,
                    std::array<std::int64_t, 2> offset);
kernels::KernelTable kernelTable(const Mesh& mesh, double alpha,
                                 KernelMode mode);

/// Riesz potential of f sampled at cell centers by dense summation.
StepFunction rieszReference(const StepFunction& f, double alpha,
                            KernelMode mode, Exec exec = Exec::Parallel);

/// Coefficients |Q|^{alpha/n} <f>_Q for every cube of a grid.
std::vector<double> dyadicCoefficients(const StepFunction& f, double alpha,
                                       const DyadicGrid& grid,
                                       Exec exec = Exec::Parallel);

StepFunction dyadicRiesz(const StepFunction& f, double alpha,
                         const DyadicGrid& grid, Exec exec = Exec::Parallel);
StepFunction dyadicRiesz(const StepFunction& f, double alpha, unsigned shift,
                         Exec exec = Exec::Parallel);

/// Sum of |Q|^{alpha/n} <f>_Q chi_Q over the listed cubes of a grid.
StepFunction sparseRiesz(const StepFunction& f, double alpha,
                         const DyadicGrid& grid,
                         std::span<const std::size_t> members,
                         Exec exec = Exec::Parallel);
/// As sparseRiesz, over the members contained in cube `root`.
StepFunction restrictedSparseRiesz(const StepFunction& f, double alpha,
                                   const DyadicGrid& grid,
                                   std::span<const std::size_t> members,
                                   std::size_t root,
                                   Exec exec = Exec::Parallel);

/// Dyadic maximal function over every shifted grid.
StepFunction hlMaximal(const StepFunction& f, Exec exec = Exec::Parallel);

/// sup over cubes Q of one grid containing x of mu(Q)^{alpha/n - 1} int_Q f dmu,
/// with 0/0 := 0 on mu-null cubes.
StepFunction fracMaximalWeighted(const StepFunction& f, const StepFunction& mu,
                                 double alpha, const DyadicGrid& grid,
                                 Exec exec = Exec::Parallel);

struct PointwiseComparison {
  double minRatio = 0.0;
  double maxRatio = 0.0;
  std::size_t argmin = 0;
  std::size_t argmax = 0;
  std::size_t compared = 0;
  /// Cells with B = 0 but A > 0.
  std::vector<std::size_t> violations;
};

/// Ratio statistics of A / B over cells where B > 0.
PointwiseComparison comparePointwise(const StepFunction& a,
                                     const StepFunction& b);

/// C with I^{D^t} f <= C * I_alpha f (upper kernel) at every cell center:
/// (sqrt n)^{n-alpha} / (1 - 2^{alpha-n}).
double dyadicUpperConstant(int n, double alpha);

/// Volume of the unit ball in R^n (n = 1, 2).
double unitBallVolume(int n);

}  // namespace riesz
