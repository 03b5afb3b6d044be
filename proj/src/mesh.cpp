#include "riesz/mesh.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace riesz {

namespace {

std::int64_t floorDiv(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::int64_t ceilDiv(std::int64_t a, std::int64_t b) {
  return -floorDiv(-a, b);
}

int parity(int k) { return ((k % 2) + 2) % 2; }

// (-1)^k
std::int64_t levelSign(int k) { return parity(k) == 0 ? 1 : -1; }

// Tick offset of the shifted grid origin at level k along one axis.
std::int64_t shiftOffset(unsigned shift, int d, int level, std::int64_t scale) {
  const std::int64_t s = (shift >> d) & 1u;
  return levelSign(level) * scale * s;
}

}  // namespace

std::string toString(const DyadicCube& q, int n) {
  std::ostringstream os;
  os << "[shift=" << q.shift << ", level=" << q.level << ", coord=(";
  for (int d = 0; d < n; ++d) os << (d ? "," : "") << q.coord[d];
  os << ")]";
  return os.str();
}

Mesh::Mesh(int n, int baseExponent, int finestExponent, int coarsePadding,
           std::size_t cellBudget)
    : n_(n), J_(baseExponent), L_(finestExponent), T_(coarsePadding) {
  if (n_ != 1 && n_ != 2)
    throw std::invalid_argument("mesh dimension must be 1 or 2");
  if (J_ < 0 || L_ < 0 || T_ < 0)
    throw std::invalid_argument("mesh exponents must be nonnegative");
  if (L_ + J_ + T_ > 58)
    throw std::invalid_argument("mesh level range exceeds 64-bit ticks");
  if (n_ * (L_ + J_ + T_ + 3) > 124)
    throw std::invalid_argument("mesh level range exceeds exact measures");
  if (n_ * (J_ + L_) > 40)
    throw std::invalid_argument("mesh cell count exceeds budget");
  cellCount_ = std::size_t{1} << (n_ * (J_ + L_));
  if (cellCount_ > cellBudget)
    throw std::invalid_argument("mesh cell count exceeds budget");
}

double Mesh::cellSide() const { return std::ldexp(1.0, -L_); }
double Mesh::cellVolume() const { return std::ldexp(1.0, -n_ * L_); }

std::int64_t Mesh::sideTicks(int level) const {
  return 3 * (std::int64_t{1} << (L_ - level));
}

TickBox Mesh::bounds(const DyadicCube& q) const {
  TickBox b;
  const std::int64_t scale = std::int64_t{1} << (L_ - q.level);
  for (int d = 0; d < n_; ++d) {
    b.lo[d] = 3 * scale * q.coord[d] + shiftOffset(q.shift, d, q.level, scale);
    b.hi[d] = b.lo[d] + 3 * scale;
  }
  return b;
}

Measure Mesh::measure(const TickBox& b) const {
  Measure m = 1;
  for (int d = 0; d < n_; ++d) {
    if (b.hi[d] <= b.lo[d]) return 0;
    m *= static_cast<Measure>(b.hi[d] - b.lo[d]);
  }
  return m;
}

Measure Mesh::measure(const DyadicCube& q) const { return measure(bounds(q)); }

double Mesh::volume(const TickBox& b) const {
  double v = 1.0;
  for (int d = 0; d < n_; ++d) {
    if (b.hi[d] <= b.lo[d]) return 0.0;
    v *= static_cast<double>(b.hi[d] - b.lo[d]);
  }
  return v * cellVolume() / (n_ == 1 ? 3.0 : 9.0);
}

double Mesh::volume(const DyadicCube& q) const {
  return std::ldexp(1.0, -n_ * q.level);
}

TickBox Mesh::baseBox() const {
  TickBox b;
  for (int d = 0; d < n_; ++d) {
    b.lo[d] = 0;
    b.hi[d] = ticksPerSide();
  }
  return b;
}

bool Mesh::insideBaseBox(const TickBox& b) const {
  return containsBox(baseBox(), b, n_);
}

bool Mesh::intersectsBaseBox(const TickBox& b) const {
  return !isEmpty(intersect(baseBox(), b, n_), n_);
}

DyadicCube Mesh::locate(unsigned shift, int level,
                        std::array<std::int64_t, 2> x2) const {
  DyadicCube q;
  q.shift = shift;
  q.level = level;
  const std::int64_t scale = std::int64_t{1} << (L_ - level);
  for (int d = 0; d < n_; ++d) {
    q.coord[d] =
        floorDiv(x2[d] - 2 * shiftOffset(shift, d, level, scale), 6 * scale);
  }
  return q;
}

std::array<std::int64_t, 2> Mesh::cellMultiIndex(std::size_t cell) const {
  const auto N = static_cast<std::size_t>(cellsPerSide());
  if (n_ == 1) return {static_cast<std::int64_t>(cell), 0};
  return {static_cast<std::int64_t>(cell / N),
          static_cast<std::int64_t>(cell % N)};
}

std::array<std::int64_t, 2> Mesh::cellCenterDoubled(std::size_t cell) const {
  auto idx = cellMultiIndex(cell);
  std::array<std::int64_t, 2> x{0, 0};
  for (int d = 0; d < n_; ++d) x[d] = 6 * idx[d] + 3;
  return x;
}

std::array<double, 2> Mesh::cellCenter(std::size_t cell) const {
  auto idx = cellMultiIndex(cell);
  std::array<double, 2> x{0.0, 0.0};
  for (int d = 0; d < n_; ++d)
    x[d] = (static_cast<double>(idx[d]) + 0.5) * cellSide();
  return x;
}

TickBox intersect(const TickBox& a, const TickBox& b, int n) {
  TickBox r;
  for (int d = 0; d < n; ++d) {
    r.lo[d] = std::max(a.lo[d], b.lo[d]);
    r.hi[d] = std::min(a.hi[d], b.hi[d]);
  }
  return r;
}

bool isEmpty(const TickBox& b, int n) {
  for (int d = 0; d < n; ++d)
    if (b.hi[d] <= b.lo[d]) return true;
  return false;
}

bool containsBox(const TickBox& outer, const TickBox& inner, int n) {
  for (int d = 0; d < n; ++d)
    if (inner.lo[d] < outer.lo[d] || inner.hi[d] > outer.hi[d]) return false;
  return true;
}

// ---------------------------------------------------------------------------

StepFunction::StepFunction(const Mesh& mesh, std::vector<double> values)
    : mesh_(mesh), values_(std::move(values)) {
  if (values_.size() != mesh_.cellCount())
    throw std::invalid_argument("step function size does not match mesh");
  for (double v : values_)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw std::invalid_argument(
          "step function values must be finite and nonnegative");
}

StepFunction StepFunction::constant(const Mesh& mesh, double c) {
  return StepFunction(mesh, std::vector<double>(mesh.cellCount(), c));
}

double StepFunction::total() const {
  return CubeIntegrator(*this).total();
}

bool StepFunction::isZero() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](double v) { return v == 0.0; });
}

double StepFunction::maxValue() const {
  return values_.empty() ? 0.0
                         : *std::max_element(values_.begin(), values_.end());
}

StepFunction StepFunction::scaled(double c) const {
  std::vector<double> v(values_);
  for (double& x : v) x *= c;
  return StepFunction(mesh_, std::move(v));
}

StepFunction StepFunction::power(double e) const {
  std::vector<double> v(values_);
  for (double& x : v) x = x > 0.0 ? std::pow(x, e) : 0.0;
  return StepFunction(mesh_, std::move(v));
}

StepFunction StepFunction::times(const StepFunction& g) const {
  if (!(g.mesh_ == mesh_)) throw std::invalid_argument("mesh mismatch");
  std::vector<double> v(values_);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] *= g.values_[i];
  return StepFunction(mesh_, std::move(v));
}

StepFunction StepFunction::plus(const StepFunction& g) const {
  if (!(g.mesh_ == mesh_)) throw std::invalid_argument("mesh mismatch");
  std::vector<double> v(values_);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += g.values_[i];
  return StepFunction(mesh_, std::move(v));
}

// ---------------------------------------------------------------------------

DyadicGrid::DyadicGrid(const Mesh& mesh, unsigned shift)
    : mesh_(mesh), shift_(shift) {
  if (shift >= mesh.shiftCount())
    throw std::invalid_argument("grid shift out of range");
  const int n = mesh.dim();
  const std::int64_t extent = mesh.ticksPerSide();
  for (int k = mesh.coarsestLevel(); k <= mesh.finestLevel(); ++k) {
    LevelTable t;
    t.offset = cubes_.size();
    const std::int64_t scale = std::int64_t{1} << (mesh.finestLevel() - k);
    const std::int64_t side = 3 * scale;
    for (int d = 0; d < n; ++d) {
      const std::int64_t off = shiftOffset(shift, d, k, scale);
      const std::int64_t mmin = floorDiv(-off - side, side) + 1;
      const std::int64_t mmax = ceilDiv(extent - off, side) - 1;
      t.minCoord[d] = mmin;
      t.count[d] = mmax - mmin + 1;
    }
    for (std::int64_t a = 0; a < t.count[0]; ++a) {
      for (std::int64_t b = 0; b < t.count[1]; ++b) {
        DyadicCube q;
        q.shift = shift;
        q.level = k;
        q.coord[0] = t.minCoord[0] + a;
        if (n == 2) q.coord[1] = t.minCoord[1] + b;
        cubes_.push_back(q);
        boxes_.push_back(mesh.bounds(q));
      }
    }
    levels_.push_back(t);
  }
  parent_.assign(cubes_.size(), -1);
  for (std::size_t i = 0; i < cubes_.size(); ++i) {
    if (cubes_[i].level == mesh.coarsestLevel()) continue;
    parent_[i] = static_cast<std::ptrdiff_t>(ancestorAt(i, cubes_[i].level - 1));
  }
}

std::size_t DyadicGrid::levelBegin(int level) const {
  return levels_.at(level - mesh_.coarsestLevel()).offset;
}

std::size_t DyadicGrid::levelEnd(int level) const {
  if (level == mesh_.finestLevel()) return cubes_.size();
  return levelBegin(level + 1);
}

std::optional<std::size_t> DyadicGrid::find(const DyadicCube& q) const {
  if (q.shift != shift_ || q.level < mesh_.coarsestLevel() ||
      q.level > mesh_.finestLevel())
    return std::nullopt;
  const LevelTable& t = levels_[q.level - mesh_.coarsestLevel()];
  std::size_t idx = t.offset;
  std::int64_t stride = 1;
  for (int d = mesh_.dim() - 1; d >= 0; --d) {
    const std::int64_t r = q.coord[d] - t.minCoord[d];
    if (r < 0 || r >= t.count[d]) return std::nullopt;
    idx += static_cast<std::size_t>(r * stride);
    stride *= t.count[d];
  }
  return idx;
}

std::size_t DyadicGrid::indexAt(int level,
                                std::array<std::int64_t, 2> x2) const {
  auto idx = find(mesh_.locate(shift_, level, x2));
  if (!idx) throw std::out_of_range("point outside the enumerated grid");
  return *idx;
}

std::size_t DyadicGrid::locateCell(int level, std::size_t cell) const {
  return indexAt(level, mesh_.cellCenterDoubled(cell));
}

std::size_t DyadicGrid::ancestorAt(std::size_t i, int level) const {
  if (level == cubes_[i].level) return i;
  const TickBox& b = boxes_[i];
  return indexAt(level, {b.lo[0] + b.hi[0], b.lo[1] + b.hi[1]});
}

bool DyadicGrid::contains(std::size_t outer, std::size_t inner) const {
  if (cubes_[outer].level > cubes_[inner].level) return false;
  return ancestorAt(inner, cubes_[outer].level) == outer;
}

CubeCorpus CubeCorpus::meetingBox(const Mesh& mesh) {
  CubeCorpus c;
  for (unsigned t = 0; t < mesh.shiftCount(); ++t) {
    c.grids_.emplace_back(mesh, t);
    for (std::size_t i = 0; i < c.grids_.back().size(); ++i)
      c.cubes_.push_back({t, i});
  }
  return c;
}

CubeCorpus CubeCorpus::insideBox(const Mesh& mesh) {
  CubeCorpus c;
  for (unsigned t = 0; t < mesh.shiftCount(); ++t) {
    c.grids_.emplace_back(mesh, t);
    const DyadicGrid& g = c.grids_.back();
    for (std::size_t i = 0; i < g.size(); ++i)
      if (g.insideBaseBox(i)) c.cubes_.push_back({t, i});
  }
  return c;
}

CubeCorpus CubeCorpus::singleGrid(const Mesh& mesh, unsigned shift) {
  CubeCorpus c;
  for (unsigned t = 0; t < mesh.shiftCount(); ++t) c.grids_.emplace_back(mesh, t);
  for (std::size_t i = 0; i < c.grids_[shift].size(); ++i)
    c.cubes_.push_back({shift, i});
  return c;
}

std::vector<DyadicCube> enumerateCubes(const Mesh& mesh, unsigned shift) {
  DyadicGrid g(mesh, shift);
  return {g.cubes().begin(), g.cubes().end()};
}

// ---------------------------------------------------------------------------

CubeIntegrator::CubeIntegrator(const Mesh& mesh, std::span<const double> values)
    : mesh_(mesh), values_(values.begin(), values.end()) {
  if (values_.size() != mesh.cellCount())
    throw std::invalid_argument("integrator size does not match mesh");
  const auto N = static_cast<std::size_t>(mesh.cellsPerSide());
  if (mesh.dim() == 1) {
    prefix_.assign(N + 1, 0.0);
    for (std::size_t i = 0; i < N; ++i) prefix_[i + 1] = prefix_[i] + values_[i];
  } else {
    const std::size_t W = N + 1;
    prefix_.assign(W * W, 0.0);
    for (std::size_t i = 0; i < N; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < N; ++j) {
        row += values_[i * N + j];
        prefix_[(i + 1) * W + (j + 1)] = prefix_[i * W + (j + 1)] + row;
      }
    }
  }
}

CubeIntegrator::CubeIntegrator(const StepFunction& f)
    : CubeIntegrator(f.mesh(), f.values()) {}

double CubeIntegrator::cumulative(std::array<std::int64_t, 2> x) const {
  const std::int64_t ext = mesh_.ticksPerSide();
  const auto N = static_cast<std::size_t>(mesh_.cellsPerSide());
  for (int d = 0; d < mesh_.dim(); ++d) x[d] = std::clamp<std::int64_t>(x[d], 0, ext);
  const auto i = static_cast<std::size_t>(x[0] / 3);
  const auto r = static_cast<double>(x[0] % 3);
  if (mesh_.dim() == 1) {
    double g = 3.0 * prefix_[i];
    if (r != 0.0) g += r * values_[i];
    return g;
  }
  const std::size_t W = N + 1;
  const auto j = static_cast<std::size_t>(x[1] / 3);
  const auto s = static_cast<double>(x[1] % 3);
  const double s00 = prefix_[i * W + j];
  double g = 9.0 * s00;
  if (r != 0.0) g += 3.0 * r * (prefix_[(i + 1) * W + j] - s00);
  if (s != 0.0) g += 3.0 * s * (prefix_[i * W + j + 1] - s00);
  if (r != 0.0 && s != 0.0) g += r * s * values_[i * N + j];
  return g;
}

double CubeIntegrator::tickIntegral(const TickBox& box) const {
  const int n = mesh_.dim();
  const TickBox b = intersect(box, mesh_.baseBox(), n);
  if (isEmpty(b, n)) return 0.0;
  if (n == 1) return cumulative({b.hi[0], 0}) - cumulative({b.lo[0], 0});
  return cumulative({b.hi[0], b.hi[1]}) - cumulative({b.lo[0], b.hi[1]}) -
         cumulative({b.hi[0], b.lo[1]}) + cumulative({b.lo[0], b.lo[1]});
}

double CubeIntegrator::integral(const TickBox& box) const {
  return tickIntegral(box) * mesh_.cellVolume() /
         (mesh_.dim() == 1 ? 3.0 : 9.0);
}

double CubeIntegrator::total() const { return integral(mesh_.baseBox()); }

double cubeIntegral(const StepFunction& f, const DyadicGrid& grid,
                    std::size_t i) {
  return CubeIntegrator(f).integral(grid, i);
}

double cubeAverage(const StepFunction& f, const DyadicGrid& grid,
                   std::size_t i) {
  return cubeIntegral(f, grid, i) / grid.volume(i);
}

// ---------------------------------------------------------------------------

double sideLength(const DyadicCube& q) { return std::ldexp(1.0, -q.level); }

std::array<double, 2> lowerCorner(const DyadicCube& q, int n) {
  std::array<double, 2> x{0.0, 0.0};
  const double sign = static_cast<double>(levelSign(q.level));
  for (int d = 0; d < n; ++d) {
    const double t = ((q.shift >> d) & 1u) ? 1.0 / 3.0 : 0.0;
    x[d] = sideLength(q) * (static_cast<double>(q.coord[d]) + sign * t);
  }
  return x;
}

CoveringCube coveringShiftedCube(const Mesh& mesh, std::array<double, 2> lower,
                                 double side) {
  if (!(side > 0.0)) throw std::invalid_argument("cube side must be positive");
  const int n = mesh.dim();
  const int finest = std::min(mesh.finestLevel(),
                              static_cast<int>(std::floor(-std::log2(side))));
  const int coarsest = std::max(
      mesh.coarsestLevel(), static_cast<int>(std::ceil(-std::log2(6.0 * side))));
  for (int k = finest; k >= coarsest; --k) {
    const double len = std::ldexp(1.0, -k);
    if (len < side || len > 6.0 * side) continue;
    const double sign = static_cast<double>(levelSign(k));
    for (unsigned t = 0; t < mesh.shiftCount(); ++t) {
      DyadicCube q;
      q.shift = t;
      q.level = k;
      bool ok = true;
      for (int d = 0; d < n; ++d) {
        const double off = ((t >> d) & 1u) ? sign / 3.0 : 0.0;
        const double m = std::floor(std::ldexp(lower[d], k) - off);
        q.coord[d] = static_cast<std::int64_t>(m);
        const double lo = len * (m + off);
        if (lower[d] < lo || lower[d] + side > lo + len) ok = false;
      }
      if (ok) return {t, q, len};
    }
  }
  throw std::domain_error(
      "no covering shifted cube within the mesh level range");
}

}  // namespace riesz
