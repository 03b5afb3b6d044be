#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "riesz/mesh.hpp"
#include "riesz/operators.hpp"
#include "riesz/weights.hpp"

namespace riesz {

/// A set of cubes of one grid, kept in grid order (coarse to fine), with the
/// inclusion forest among the members.
class SparseFamily {
 public:
  SparseFamily(std::shared_ptr<const DyadicGrid> grid,
               std::vector<std::size_t> members);
  /// Cubes must all belong to the grid of the given shift.
  static SparseFamily fromCubes(const Mesh& mesh, unsigned shift,
                                std::span<const DyadicCube> cubes);

  const DyadicGrid& grid() const { return *grid_; }
  std::shared_ptr<const DyadicGrid> gridPtr() const { return grid_; }
  unsigned shift() const { return grid_->shift(); }
  const Mesh& mesh() const { return grid_->mesh(); }

  /// Grid indices of the members.
  std::span<const std::size_t> members() const { return members_; }
  std::size_t size() const { return members_.size(); }
  bool empty() const { return members_.empty(); }
  bool isMember(std::size_t gridIndex) const { return slot_[gridIndex] >= 0; }
  /// Position of a member in members(), or -1.
  std::ptrdiff_t slot(std::size_t gridIndex) const { return slot_[gridIndex]; }

  /// Slot of the smallest member strictly containing member `slot`, or -1.
  std::ptrdiff_t treeParent(std::size_t slot) const { return treeParent_[slot]; }
  std::span<const std::size_t> treeChildren(std::size_t slot) const {
    return treeChildren_[slot];
  }
  /// Grid indices of the members contained in grid cube `root`.
  std::vector<std::size_t> within(std::size_t root) const;

 private:
  std::shared_ptr<const DyadicGrid> grid_;
  std::vector<std::size_t> members_;
  std::vector<std::ptrdiff_t> slot_;
  std::vector<std::ptrdiff_t> treeParent_;
  std::vector<std::vector<std::size_t>> treeChildren_;
};

struct SparseBuild {
  SparseFamily family;
  /// Per member: the largest k with avg_Q f > a^k, a = 2^{n+1}.
  std::vector<int> topSlice;
};

/// Maximal cubes with avg f > a^k for every k, a = 2^{n+1}, selected coarse
/// to fine inside the truncated grid. Throws std::invalid_argument when f
/// vanishes. The coarsest cubes have no parent to bound their average; with
/// padding T >= 3 the base box sits in one child of each coarsest cube and
/// the family is sparse, with smaller padding verifySparse may flag them.
SparseBuild buildSparse(const StepFunction& f,
                        std::shared_ptr<const DyadicGrid> grid,
                        Exec exec = Exec::Parallel);
SparseBuild buildSparse(const StepFunction& f, unsigned shift,
                        Exec exec = Exec::Parallel);

/// 2^{n+1} / (1 - 2^{-alpha})
double sparseDominationConstant(int n, double alpha);

struct DominationCheck {
  double constant = 0.0;
  std::size_t violations = 0;
  /// max over cells of dyadic / (constant * sparse); 0 when dyadic vanishes
  double worstRatio = 0.0;
  std::size_t worstCell = 0;
};

/// Cellwise dyadicRiesz(f) <= constant * sparseRiesz(f, S) on S's grid.
DominationCheck checkDomination(const StepFunction& f, double alpha,
                                const SparseFamily& s,
                                Exec exec = Exec::Parallel);

struct SparseCertificate {
  bool sparse = true;    // 2 |union of strict sub-members| <= |Q| for all Q
  bool disjoint = true;  // sum of |E(Q)| equals |union of S|
  /// largest |union of strict sub-members| / |Q|
  double worstRatio = 0.0;
  std::optional<std::size_t> worstCube;  // grid index
  std::optional<std::size_t> violation;  // first failing grid index
  std::vector<Measure> eMeasure;         // |E(Q)| per member, in ticks^n

  bool ok() const { return sparse && disjoint; }
};

/// Exact integer check of the sparsity condition and |E(Q)| <= |Q| <= 2|E(Q)|.
SparseCertificate verifySparse(const SparseFamily& s);

struct OverlapLevelSet {
  Measure measure = 0;      // |{x in R0 : #members in R0 containing x > k}|
  Measure rootMeasure = 0;  // |R0|
  /// generations[j] = grid indices of the members of S(R0) at depth j + 1
  std::vector<std::vector<std::size_t>> generations;

  /// measure / |R0|
  double ratio() const { return toDouble(measure) / toDouble(rootMeasure); }
  /// 2^k measure <= |R0|, in exact arithmetic
  bool withinBound(int k) const;
};

/// The level set is the union of the members k+1 levels down the inclusion
/// forest of S(R0), measured exactly. Needs k >= 1.
OverlapLevelSet overlapLevelSet(const SparseFamily& s, std::size_t root, int k);

// ---------------------------------------------------------------------------

/// What the a-slices freeze: (avg u)^{1/q} (avg sigma)^{1/p'}, optionally
/// times |Q|^{alpha/n + 1/q - 1/p}.
enum class SliceMode { Sobolev, Fractional };

struct CoronaCube {
  std::size_t cube = 0;  // grid index
  int a = 0;
  int b = 0;
  std::size_t stop = 0;  // grid index of the governing stopping cube
  bool stopping = false;
  int generation = -1;  // stopping cubes only
  std::optional<std::size_t> parentStop;  // previous stopping generation
  double slice = 0.0;  // the value sliced into (2^a, 2^{a+1}]
  double frac = 0.0;   // |Q|^{alpha/n} avg_Q u
};

struct CoronaDecomposition {
  std::shared_ptr<const DyadicGrid> grid;
  std::size_t root = 0;
  SliceMode mode = SliceMode::Sobolev;
  int n = 1;
  double alpha = 0.5, p = 2.0, q = 2.0;
  /// Members of S(R) with positive u and sigma averages, in grid order.
  std::vector<CoronaCube> cubes;
  /// Members of S(R) where avg u or avg sigma vanishes.
  std::vector<std::size_t> unassigned;
  std::vector<int> slices;  // distinct a, increasing
  double gamma = 0.0;       // log2 of the largest slice value

  /// Positions in `cubes` of Q^a, of the stopping set C^a, of Q^a(P) and of
  /// Q^a_b(P); P is a grid index.
  std::vector<std::size_t> slice(int a) const;
  std::vector<std::size_t> stopping(int a) const;
  std::vector<std::size_t> governed(int a, std::size_t P) const;
  std::vector<std::size_t> governed(int a, std::size_t P, int b) const;
  /// b values occurring in Q^a(P), increasing
  std::vector<int> bValues(int a, std::size_t P) const;
};

CoronaDecomposition coronaDecompose(const SparseFamily& s, std::size_t root,
                                    const StepFunction& u,
                                    const StepFunction& sigma,
                                    const ExponentTuple& e,
                                    SliceMode mode = SliceMode::Sobolev);

struct CoronaCertificate {
  bool sliceMembership = true;
  bool stoppingInequality = true;
  bool reverseInequality = true;
  bool bSlices = true;
  bool partition = true;
  std::string firstFailure;

  bool ok() const {
    return sliceMembership && stoppingInequality && reverseInequality &&
           bSlices && partition;
  }
};

/// Recomputes every average from u and sigma and checks the four corona
/// invariants and the disjoint-union structure with exact comparisons.
CoronaCertificate certifyCorona(const CoronaDecomposition& cd,
                                const SparseFamily& s, const StepFunction& u,
                                const StepFunction& sigma);

/// Grid indices of the members of Q^a_b(P) k+1 levels down their inclusion
/// forest; their union is F^a_b(k, P).
std::vector<std::size_t> levelSetCubes(const CoronaDecomposition& cd, int a,
                                       std::size_t P, int b, int k);

struct DecayRow {
  int a = 0;
  std::size_t P = 0;
  int b = 0;
  int k = 0;
  double sigmaF = 0.0;
  double sigmaP = 0.0;
  double ratio = 0.0;
  double bound = 0.0;  // constant * 2^{-k}
};

struct DecayTable {
  std::vector<DecayRow> rows;
  /// sigma(Q) ~ |Q|^gamma inside one (a, P, b) cell of the decomposition;
  /// the proof's decay exponent.
  double gamma = 1.0;
  /// ratio <= constant * 2^{-k} whenever gamma >= 1
  double constant = 0.0;
  bool asserted = false;
  bool ok = true;
  std::size_t skipped = 0;  // rows with sigma(P) = 0
  /// slope of -log2(max ratio at k) against k, NaN with fewer than 2 points
  double fittedRate = 0.0;
};

/// sigma(F^a_b(k, P)) / sigma(P) for k = 0..kmax.
DecayTable sigmaDecayCheck(const CoronaDecomposition& cd,
                           const StepFunction& sigma, int kmax = 10);

// ---------------------------------------------------------------------------

struct CarlesonResult {
  double constant = 0.0;  // smallest A with sum_{Q in R} c_Q <= A mu(R)
  std::optional<std::size_t> witness;
  bool infinite = false;  // some R has mu(R) = 0 but positive mass
  std::size_t checked = 0;
};

/// c is given as (grid index, value) pairs. R ranges over every cube of the
/// grid, or over the cubes inside `root` when given.
CarlesonResult carlesonConstant(const DyadicGrid& grid,
                                std::span<const std::pair<std::size_t, double>> c,
                                const StepFunction& mu,
                                std::optional<std::size_t> root = {});

struct EmbeddingCheck {
  double lhs = 0.0;  // (sum c_Q a(f,Q)^q)^{1/q}
  double rhs = 0.0;  // A^{1/q} ||M^D_{alpha,mu} f||_{L^q(mu)}
  double A = 0.0;
};

/// a(f,Q) = mu(Q)^{alpha/n - 1} int_Q f dmu (0 on mu-null cubes). The maximal
/// function is evaluated on tick cells so the norm is exact for every shift.
EmbeddingCheck carlesonEmbedding(const DyadicGrid& grid,
                                 std::span<const std::pair<std::size_t, double>> c,
                                 const StepFunction& mu, const StepFunction& f,
                                 double alpha, double q);

struct CoronaCarlesonRow {
  int a = 0;
  double A = 0.0;  // max over P inside R of sum_{Q in C^a, Q in P} u(Q) / u(P)
  std::size_t witness = 0;
  /// max over the same P of the sum divided by 2 FW(P) u(P), FW(P) the
  /// Fujii-Wilson quotient of P; at most 1 by the E(Q) argument
  double worstRatio = 0.0;
};

std::vector<CoronaCarlesonRow> coronaCarleson(const CoronaDecomposition& cd,
                                              const StepFunction& u);

}  // namespace riesz
