#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "riesz/mesh.hpp"
#include "riesz/operators.hpp"
#include "riesz/sparse.hpp"
#include "riesz/weights.hpp"

namespace riesz {

/// A nonnegative linear operator on step functions, assumed self-adjoint
/// with respect to Lebesgue measure.
struct LinearOperator {
  std::string name;
  std::function<StepFunction(const StepFunction&)> apply;

  StepFunction operator()(const StepFunction& f) const { return apply(f); }
};

/// I^S_alpha. Throws std::invalid_argument for a shifted family: sampled at
/// cell centers, only the shift-0 operator is exactly symmetric.
LinearOperator sparseOperator(const SparseFamily& s, double alpha);
LinearOperator dyadicOperator(const Mesh& mesh, double alpha);
LinearOperator referenceOperator(double alpha, KernelMode mode);

/// sup_t t u({h > t})^{1/q}, scanning the distinct values of h.
double weakLorentzNorm(const StepFunction& h, const StepFunction& u, double q);
/// (int |h|^q u)^{1/q}
double lebesgueNorm(const StepFunction& h, const StepFunction& u, double q);

struct TestingReport {
  double direct = 0.0;  // [u,sigma]_{p,q}
  double dual = 0.0;    // [sigma,u]_{q',p'}
  std::optional<DyadicCube> directWitness, dualWitness;
  std::size_t directSkipped = 0, dualSkipped = 0;
  /// Per-cube values in the order of `cubes`; NaN where skipped.
  std::vector<DyadicCube> cubes;
  std::vector<double> directPerCube, dualPerCube;
};

/// sup over the corpus cubes of (int_Q I(chi_Q sigma)^q u)^{1/q} / sigma(Q)^{1/p}
/// and its dual, I the reference potential. On shifted cubes chi_Q sigma is
/// the cell value times the fraction of the cell inside Q.
TestingReport continuousTesting(const StepFunction& u, const StepFunction& sigma,
                            const ExponentTuple& e, KernelMode mode,
                            const CubeCorpus& corpus);
TestingReport continuousTesting(const StepFunction& u, const StepFunction& sigma,
                            const ExponentTuple& e, KernelMode mode);

/// sup over every cube R of S's grid of
/// sigma(R)^{-1/p} (int_R (I^{S(R)}(sigma chi_R))^q u)^{1/q} and the dual.
/// The integral is exact: the integrand is constant on each E(Q).
TestingReport dyadicTesting(const StepFunction& u, const StepFunction& sigma,
                            const ExponentTuple& e, const SparseFamily& s);

struct NormEstimate {
  double value = 0.0;  // lower bound on the operator norm
  std::vector<double> f;  // witness cell values, normalized in L^p(sigma)
  std::vector<double> g;  // normalized in L^{q'}(u); empty for weak type
  int iterations = 0;
  std::string seed;    // label of the winning start
  std::string seedSet;
  bool converged = false;
  bool degenerate = false;
  /// Objective after each iteration of the winning start.
  std::vector<double> history;
};

struct NormOptions {
  int maxIterations = 100;
  double relTol = 1e-8;
  int randomStarts = 8;
  /// chi_R starts kept for iteration after ranking by the starting value
  int cubeStarts = 4;
  std::uint64_t seed = 0;
  /// Extra chi_R candidates, e.g. the testing witness.
  std::vector<DyadicCube> extraCubes;
  /// Where the family's cubes come from for chi_R starts.
  const SparseFamily* family = nullptr;
};

/// Alternating maximization of int T(f sigma) g u over the unit spheres of
/// L^p(sigma) and L^{q'}(u), multi-started. The objective is nondecreasing up
/// to rounding; a drop larger than 1e-12 relative throws std::logic_error.
NormEstimate strongNormLower(const StepFunction& u, const StepFunction& sigma,
                             const ExponentTuple& e, const LinearOperator& T,
                             const NormOptions& opt = {});

/// max of weakLorentzNorm(T(f sigma), u, q) / ||f||_{L^p(sigma)} over the
/// strong witness, every chi_R with R in the family, and random starts.
NormEstimate weakNormLower(const StepFunction& u, const StepFunction& sigma,
                           const ExponentTuple& e, const LinearOperator& T,
                           const NormOptions& opt = {},
                           const NormEstimate* strong = nullptr);

/// ||T(f sigma)||_{L^q(u)} / ||f||_{L^p(sigma)} and the weak analogue.
double strongFunctional(const StepFunction& f, const StepFunction& u,
                        const StepFunction& sigma, const ExponentTuple& e,
                        const LinearOperator& T);
double weakFunctional(const StepFunction& f, const StepFunction& u,
                      const StepFunction& sigma, const ExponentTuple& e,
                      const LinearOperator& T);

struct SandwichRow {
  double strong = 0.0, weak = 0.0;
  double direct = 0.0, dual = 0.0;
  double r1 = 0.0;  // strong / (direct + dual)
  double r2 = 0.0;  // weak / dual
  bool skipped = false;
  std::optional<DyadicCube> directWitness;
  bool testingBelowNorm = true;  // direct <= strong + 1e-8
};

SandwichRow testingSandwich(const StepFunction& u, const StepFunction& sigma,
                         const ExponentTuple& e, const SparseFamily& s,
                         NormOptions opt = {});

struct BoundRatio {
  double testing = 0.0;
  double bound = 0.0;  // the right-hand side
  double ratio = 0.0;  // NaN when skipped
  bool skipped = false;
  std::string reason;
};

/// dual testing / ([u,sigma]^{1/q}_{A_{s(p)}} [u]^{1/p'}_{A_inf'}) and, by the
/// symmetric argument, direct testing / ([u,sigma]^{1/q}_{A_{s(p)}}
/// [sigma]^{1/q}_{A_inf'}). Needs Sobolev exponents.
struct MixedBoundCheck {
  BoundRatio dual, direct;
};
MixedBoundCheck mixedBoundCheck(const StepFunction& u, const StepFunction& sigma,
                           const ExponentTuple& e, const SparseFamily& s);

enum class BumpKind { Log, LogLog };

/// Raised when the exponents fall outside the range the bound is stated for.
class RangeRefusal : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// dual testing / K with K = sup |Q|^{alpha/n+1/q-1/p} ||u^{1/q}||_{Phi,Q}
/// ||sigma^{1/p'}||_{p',Q}, Phi the log or loglog bump of order q. Refuses
/// unless p < q and (p'/q')(1 - alpha/n) >= 1.
BoundRatio bumpBoundCheck(const StepFunction& u, const StepFunction& sigma,
                           const ExponentTuple& e, const SparseFamily& s,
                           BumpKind kind, double delta = 1.0);
/// direct testing / K with the bump on sigma^{1/p'} (order p') and the plain
/// L^q norm of u^{1/q}. Refuses unless p < q and (q/p)(1 - alpha/n) >= 1.
BoundRatio bumpDualBoundCheck(const StepFunction& u, const StepFunction& sigma,
                               const ExponentTuple& e, const SparseFamily& s,
                               BumpKind kind, double delta = 1.0);

// --- calibration ------------------------------------------------------------

/// One (u, sigma) instance of the sandwich corpus.
struct CorpusPair {
  std::string uSpec, sigmaSpec;
  StepFunction u, sigma;
};

/// Weight pairs generated from a seed: martingale, power and two-valued u,
/// with sigma = u^{1-p'} or an independent weight.
std::vector<CorpusPair> sandwichCorpus(const Mesh& mesh, const ExponentTuple& e,
                                       std::uint64_t seed, int count = 8);

struct Envelope {
  double mixed = 0.0;     // max dual-form ratio
  double mixedSym = 0.0;  // max direct-form ratio
  double bump = 0.0;     // max log-bump ratio
  double bumpLogLog = 0.0;   // max loglog-bump ratio
  double r1 = 0.0;
  double r2Lo = 0.0, r2Hi = 0.0;
  /// min over random f of min_x max_t I^{D^t}f / I_alpha f (lower kernel)
  double dyadicLower = 0.0;
  /// max over random f of ||M^D_{alpha,u} f||_{L^q(u)} / ||f||_{L^p(u)}
  double fracMaximal = 0.0;
};

struct CalibrationSetup {
  int n = 1, J = 0, L = 8, T = 3;
  double alpha = 0.5, p = 4.0 / 3.0;
  int count = 16;
  double delta = 1.0;
};

/// Ratios of every instance of one corpus folded into an envelope (maxima,
/// and the min/max of r2).
Envelope measureEnvelope(const CalibrationSetup& setup, std::uint64_t seed);

/// Reads {"setup": {...}, "envelope": {...}}; throws on a malformed file.
std::pair<CalibrationSetup, Envelope> loadCalibration(const std::string& path);
std::string defaultCalibrationPath();

/// Uniform [0,1) from the top 53 bits.
inline double unitDouble(std::uint64_t x) {
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

}  // namespace riesz
