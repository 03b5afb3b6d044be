#pragma once

#include <algorithm>
#include <utility>
#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace riesz {

/// Exact Lebesgue measure in units of tick^n, where one tick is a third of
/// the finest cell side. Every cube of every supported grid has integer tick
/// coordinates, so set measures built from cubes are exact integers.
using Measure = __int128;

inline double toDouble(Measure m) { return static_cast<double>(m); }

/// A half-open cube 2^{-level}([0,1)^n + coord + (-1)^level * t) of the grid
/// with shift t; bit d of `shift` selects t_d = 1/3.
struct DyadicCube {
  unsigned shift = 0;
  int level = 0;
  std::array<std::int64_t, 2> coord{};

  bool operator==(const DyadicCube&) const = default;
};

std::string toString(const DyadicCube& q, int n);

/// Axis-parallel box in tick coordinates, half-open on every side.
struct TickBox {
  std::array<std::int64_t, 2> lo{};
  std::array<std::int64_t, 2> hi{};
};

/// Truncated dyadic discretization of the base box [0, 2^J)^n with finest
/// cells of side 2^{-L}; dyadic sums run over levels [-(J+T), L].
class Mesh {
 public:
  static constexpr std::size_t kDefaultCellBudget = std::size_t{1} << 22;

  Mesh(int n, int baseExponent, int finestExponent, int coarsePadding,
       std::size_t cellBudget = kDefaultCellBudget);

  int dim() const { return n_; }
  int baseExponent() const { return J_; }
  int finestExponent() const { return L_; }
  int coarsePadding() const { return T_; }
  int coarsestLevel() const { return -(J_ + T_); }
  int finestLevel() const { return L_; }
  int levelCount() const { return L_ + J_ + T_ + 1; }
  unsigned shiftCount() const { return 1u << n_; }

  std::int64_t cellsPerSide() const { return std::int64_t{1} << (J_ + L_); }
  std::size_t cellCount() const { return cellCount_; }
  std::int64_t ticksPerSide() const { return 3 * cellsPerSide(); }
  double cellSide() const;
  double cellVolume() const;
  double tickLength() const { return cellSide() / 3.0; }

  /// Side length of a level-k cube measured in ticks: 3 * 2^{L-k}.
  std::int64_t sideTicks(int level) const;
  TickBox bounds(const DyadicCube& q) const;
  Measure measure(const DyadicCube& q) const;
  Measure measure(const TickBox& b) const;
  double volume(const DyadicCube& q) const;
  double volume(const TickBox& b) const;
  TickBox baseBox() const;
  bool insideBaseBox(const TickBox& b) const;
  bool intersectsBaseBox(const TickBox& b) const;

  /// Cube of the given shift and level containing a point given in doubled
  /// ticks (so that cell centers, at 3i + 3/2 ticks, are integers).
  DyadicCube locate(unsigned shift, int level,
                    std::array<std::int64_t, 2> doubledTicks) const;

  std::array<std::int64_t, 2> cellMultiIndex(std::size_t cell) const;
  std::array<std::int64_t, 2> cellCenterDoubled(std::size_t cell) const;
  /// Cell center in real coordinates.
  std::array<double, 2> cellCenter(std::size_t cell) const;

  bool operator==(const Mesh& o) const {
    return n_ == o.n_ && J_ == o.J_ && L_ == o.L_ && T_ == o.T_;
  }

 private:
  int n_;
  int J_;
  int L_;
  int T_;
  std::size_t cellCount_;
};

TickBox intersect(const TickBox& a, const TickBox& b, int n);
bool isEmpty(const TickBox& b, int n);
bool containsBox(const TickBox& outer, const TickBox& inner, int n);

/// Nonnegative function constant on the finest cells of a mesh and zero
/// outside the base box. Cells are indexed row-major with dimension 0 major.
class StepFunction {
 public:
  StepFunction(const Mesh& mesh, std::vector<double> values);
  static StepFunction constant(const Mesh& mesh, double c);
  static StepFunction zero(const Mesh& mesh) { return constant(mesh, 0.0); }

  const Mesh& mesh() const { return mesh_; }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }
  double total() const;
  bool isZero() const;
  double maxValue() const;

  StepFunction scaled(double c) const;
  StepFunction power(double e) const;  // 0^e := 0 for every exponent
  StepFunction times(const StepFunction& g) const;
  StepFunction plus(const StepFunction& g) const;

 private:
  Mesh mesh_;
  std::vector<double> values_;
};

/// The cubes of one shifted grid that intersect the base box, ordered
/// coarse-to-fine and then lexicographically by coordinate.
class DyadicGrid {
 public:
  DyadicGrid(const Mesh& mesh, unsigned shift);

  const Mesh& mesh() const { return mesh_; }
  unsigned shift() const { return shift_; }
  std::size_t size() const { return cubes_.size(); }
  const DyadicCube& cube(std::size_t i) const { return cubes_[i]; }
  std::span<const DyadicCube> cubes() const { return cubes_; }
  const TickBox& box(std::size_t i) const { return boxes_[i]; }
  Measure measure(std::size_t i) const { return mesh_.measure(boxes_[i]); }
  double volume(std::size_t i) const { return mesh_.volume(boxes_[i]); }
  int level(std::size_t i) const { return cubes_[i].level; }
  /// Index of the parent cube, or -1 at the coarsest level.
  std::ptrdiff_t parent(std::size_t i) const { return parent_[i]; }

  std::size_t levelBegin(int level) const;
  std::size_t levelEnd(int level) const;

  std::optional<std::size_t> find(const DyadicCube& q) const;
  std::size_t indexAt(int level,
                      std::array<std::int64_t, 2> doubledTicks) const;
  /// Index of the level-k cube whose interior holds the given cell's center.
  std::size_t locateCell(int level, std::size_t cell) const;
  /// True when cube `inner` is a subset of cube `outer`.
  bool contains(std::size_t outer, std::size_t inner) const;
  /// Ancestor of `i` at a coarser or equal level.
  std::size_t ancestorAt(std::size_t i, int level) const;
  bool insideBaseBox(std::size_t i) const {
    return mesh_.insideBaseBox(boxes_[i]);
  }

  /// Enumerate the finest cells meeting cube i together with the overlap
  /// measured in ticks^n.
  template <class Fn>
  void forEachCell(std::size_t i, Fn&& fn) const;

 private:
  struct LevelTable {
    std::size_t offset = 0;
    std::array<std::int64_t, 2> minCoord{};
    std::array<std::int64_t, 2> count{1, 1};
  };

  Mesh mesh_;
  unsigned shift_;
  std::vector<DyadicCube> cubes_;
  std::vector<TickBox> boxes_;
  std::vector<std::ptrdiff_t> parent_;
  std::vector<LevelTable> levels_;
};

/// Every cell meeting a tick box, with the integer overlap in ticks^n.
template <class Fn>
void forEachCellIn(const Mesh& mesh, const TickBox& box, Fn&& fn) {
  const int n = mesh.dim();
  const TickBox b = intersect(box, mesh.baseBox(), n);
  if (isEmpty(b, n)) return;
  std::array<std::int64_t, 2> c0{0, 0}, c1{1, 1};
  for (int d = 0; d < n; ++d) {
    c0[d] = b.lo[d] / 3;
    c1[d] = (b.hi[d] + 2) / 3;
  }
  const std::int64_t N = mesh.cellsPerSide();
  for (std::int64_t i = c0[0]; i < c1[0]; ++i) {
    const std::int64_t ov0 =
        std::min(b.hi[0], 3 * i + 3) - std::max(b.lo[0], 3 * i);
    if (n == 1) {
      fn(static_cast<std::size_t>(i), ov0);
      continue;
    }
    for (std::int64_t j = c0[1]; j < c1[1]; ++j) {
      const std::int64_t ov1 =
          std::min(b.hi[1], 3 * j + 3) - std::max(b.lo[1], 3 * j);
      fn(static_cast<std::size_t>(i * N + j), ov0 * ov1);
    }
  }
}

template <class Fn>
void DyadicGrid::forEachCell(std::size_t i, Fn&& fn) const {
  forEachCellIn(mesh_, boxes_[i], std::forward<Fn>(fn));
}

/// Prefix-sum table over a cell-valued array answering exact integrals over
/// arbitrary tick boxes in O(1). Values outside the base box are zero.
class CubeIntegrator {
 public:
  CubeIntegrator(const Mesh& mesh, std::span<const double> values);
  explicit CubeIntegrator(const StepFunction& f);

  const Mesh& mesh() const { return mesh_; }
  double integral(const TickBox& box) const;
  /// Integral in units of value * tick^n. Exact whenever the cell values
  /// and their partial sums are representable, for every grid shift.
  double tickIntegral(const TickBox& box) const;
  double integral(const DyadicGrid& grid, std::size_t i) const {
    return integral(grid.box(i));
  }
  double average(const DyadicGrid& grid, std::size_t i) const {
    return integral(grid.box(i)) / grid.volume(i);
  }
  double total() const;

 private:
  // Cumulative integral from the origin to a tick point, in value*tick^n.
  double cumulative(std::array<std::int64_t, 2> x) const;

  Mesh mesh_;
  std::vector<double> values_;
  std::vector<double> prefix_;  // (N+1)^n table
};

double cubeIntegral(const StepFunction& f, const DyadicGrid& grid,
                    std::size_t i);
double cubeAverage(const StepFunction& f, const DyadicGrid& grid,
                   std::size_t i);

/// Cube of one of several grids, by shift and index within that grid.
struct CubeRef {
  unsigned shift = 0;
  std::size_t index = 0;
};

/// The grids of every shift together with a selection of their cubes.
/// Cubes are listed shift by shift, coarse to fine.
class CubeCorpus {
 public:
  /// Every cube of every shift meeting the base box.
  static CubeCorpus meetingBox(const Mesh& mesh);
  /// Every cube of every shift contained in the base box.
  static CubeCorpus insideBox(const Mesh& mesh);
  /// Every cube of a single shift meeting the base box.
  static CubeCorpus singleGrid(const Mesh& mesh, unsigned shift);

  const Mesh& mesh() const { return grids_.front().mesh(); }
  const DyadicGrid& grid(unsigned shift) const { return grids_[shift]; }
  std::span<const CubeRef> cubes() const { return cubes_; }
  std::size_t size() const { return cubes_.size(); }
  const CubeRef& operator[](std::size_t i) const { return cubes_[i]; }
  const TickBox& box(const CubeRef& c) const { return grids_[c.shift].box(c.index); }
  const DyadicCube& cube(const CubeRef& c) const {
    return grids_[c.shift].cube(c.index);
  }
  double volume(const CubeRef& c) const { return grids_[c.shift].volume(c.index); }
  /// Measure in ticks^n.
  Measure measure(const CubeRef& c) const { return grids_[c.shift].measure(c.index); }

  /// Same grids, keeping only the cubes accepted by `keep`.
  template <class Pred>
  CubeCorpus filter(Pred&& keep) const {
    CubeCorpus out;
    out.grids_ = grids_;
    for (const CubeRef& c : cubes_)
      if (keep(c)) out.cubes_.push_back(c);
    return out;
  }

 private:
  CubeCorpus() = default;
  std::vector<DyadicGrid> grids_;
  std::vector<CubeRef> cubes_;
};

/// Enumeration of one grid as a list of cubes (coarse to fine).
std::vector<DyadicCube> enumerateCubes(const Mesh& mesh, unsigned shift);

struct CoveringCube {
  unsigned shift;
  DyadicCube cube;
  double side;
};

/// Smallest cube from the grids D^t, t in {0,1/3}^n, containing the cube
/// lower + [0, side)^n. Throws std::domain_error when no admissible level of
/// the mesh has a containing cube with side at most 6*side.
CoveringCube coveringShiftedCube(const Mesh& mesh,
                                 std::array<double, 2> lower, double side);

/// Real lower corner of a grid cube.
std::array<double, 2> lowerCorner(const DyadicCube& q, int n);
double sideLength(const DyadicCube& q);

}  // namespace riesz
