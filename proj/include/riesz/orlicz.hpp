#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "riesz/kernels.hpp"
#include "riesz/mesh.hpp"

namespace riesz {

enum class YoungKind {
  Power,           // t^p
  LogBump,         // t^p log(e+t)^{p-1+d}
  LogLogBump,      // t^p log(e+t)^{p-1} loglog(e^e+t)^{p-1+d}
  DualLogBump,     // t^p log(e+t)^{-1-d}
  DualLogLogBump,  // t^p log(e+t)^{-1} loglog(e^e+t)^{-1-d}
  NumericTable,    // log-log interpolation of samples
  NumericLegendre  // sup_s (st - base(s)), evaluated numerically
};

/// A Young function, optionally multiplied by a positive constant. Cheap to
/// copy; the numeric kinds share their data.
class YoungFunction {
 public:
  static YoungFunction power(double p);
  static YoungFunction logBump(double p, double delta);
  static YoungFunction logLogBump(double p, double delta);
  static YoungFunction dualLogBump(double p, double delta);
  static YoungFunction dualLogLogBump(double p, double delta);
  /// Samples (t_i, Phi(t_i)) with 0 < t_0 < t_1 < ...; checked for
  /// monotonicity, convexity and superlinear growth.
  static YoungFunction numericTable(std::vector<double> t,
                                    std::vector<double> phi);
  static YoungFunction numericLegendre(const YoungFunction& base);
  /// Parse "power:p=2", "log:p=2,delta=1", "loglog:...", "duallog:...",
  /// "dualloglog:...".
  static YoungFunction parse(const std::string& spec);

  YoungKind kind() const { return kind_; }
  double exponent() const { return p_; }
  double delta() const { return delta_; }
  double scale() const { return scale_; }
  YoungFunction scaled(double c) const;
  std::string describe() const;

  double operator()(double t) const;
  /// Smallest t with Phi(t) >= y.
  double inverse(double y) const;

  /// Exact Legendre transform for powers; the equivalent dual kind for the
  /// closed-form bumps (equivalence up to constants, not equality).
  YoungFunction associate() const;
  /// Legendre transform by ternary search on the concave map s -> st - Phi(s).
  YoungFunction numericAssociate() const { return numericLegendre(*this); }

 private:
  struct Table {
    std::vector<double> logT, logPhi;
  };

  YoungKind kind_ = YoungKind::Power;
  double p_ = 2.0;
  double delta_ = 0.0;
  double scale_ = 1.0;
  std::shared_ptr<const Table> table_;
  std::shared_ptr<const YoungFunction> base_;

  double raw(double t) const;
  double tableEval(double t) const;
  double legendreEval(double t) const;
};

/// Numerical Young-function check on a log-spaced grid: increasing, convex
/// (nondecreasing secant slopes) and Phi(t)/t increasing. The dual bump
/// closed forms fail it for exponents close to 1.
bool isYoungOnGrid(const YoungFunction& phi, double tmin = 1e-6,
                   double tmax = 1e12, int samples = 4000);

/// Values of a step function on a cube together with the fraction of the
/// cube each value occupies; the uncovered fraction carries the value 0.
struct CubeDistribution {
  std::vector<double> values;
  std::vector<double> weights;
};

CubeDistribution cubeDistribution(const StepFunction& f, const TickBox& box);
CubeDistribution cubeDistribution(const StepFunction& f, const DyadicGrid& g,
                                  std::size_t i);

struct LuxemburgOptions {
  double relTol = 1e-12;
  int maxIterations = 200;
};

/// The lambda with avg_Q Phi(f/lambda) = 1, or 0 when f vanishes on Q.
/// Throws std::runtime_error when no bracket or no convergence is found.
double luxemburgNorm(const CubeDistribution& d, const YoungFunction& phi,
                     const LuxemburgOptions& opt = {});
double luxemburgNorm(const StepFunction& f, const DyadicGrid& g, std::size_t i,
                     const YoungFunction& phi, const LuxemburgOptions& opt = {});

struct BpVerdict {
  bool finite = false;
  /// Exponents (r, a, b) of t^r log(t)^a loglog(t)^b describing Phi at
  /// infinity; for numeric kinds r is a fitted slope and a = b = 0.
  double r = 0.0, a = 0.0, b = 0.0;
  /// Log-log slope of Phi(t)/t^p at infinity.
  double tailSlope = 0.0;
  /// int_1^{1e12} Phi(t)/t^p dt/t.
  double integralToCutoff = 0.0;
  bool unreliable = false;
};

BpVerdict bpCheck(const YoungFunction& phi, double p);

/// M_Phi f: at each cell the largest Luxemburg norm over every cube of every
/// shift containing it.
StepFunction orliczMaximal(const StepFunction& f, const YoungFunction& phi,
                           kernels::Exec exec = kernels::Exec::Parallel);

struct HolderPair {
  double lhs = 0.0;
  double rhs = 0.0;
};

/// lhs = avg_Q fg, rhs = 2 ||f||_{Phi,Q} ||g||_{assoc Phi,Q}. For powers the
/// associate gauge is t^{p'}; otherwise the numeric Legendre transform.
HolderPair generalizedHolder(const StepFunction& f, const StepFunction& g,
                             const DyadicGrid& grid, std::size_t i,
                             const YoungFunction& phi);

enum class GapMode { Log, LogLog };

struct GapTriple {
  CubeRef cube;
  double n0 = 0.0;    // ||u^{1/q}||_{Phi_0,Q}
  double nPhi = 0.0;  // ||u^{1/q}||_{Phi,Q}
  double nq = 0.0;    // ||u^{1/q}||_{q,Q}
};

struct GapFit {
  GapMode mode = GapMode::Log;
  bool feasible = false;
  /// Largest gamma (log mode) or kappa (loglog mode) on the search grid for
  /// which every cube satisfies the inequality with constant <= bound.
  double parameter = 0.0;
  /// Smallest admissible constant at that parameter.
  double constant = 0.0;
  double bound = 16.0;
  double logC = 1.0;  // loglog mode: phi(t) = log(C/t)^{-kappa}, C = e
  std::size_t skipped = 0;
  std::vector<GapTriple> triples;
};

/// Fits the interpolation exponent between the bumps of order delta/2 and
/// delta and the plain L^q average over the cubes of a corpus.
GapFit crvGapCheck(const StepFunction& u, double q, double delta,
                   const CubeCorpus& corpus, GapMode mode = GapMode::Log,
                   double bound = 16.0);

}  // namespace riesz
