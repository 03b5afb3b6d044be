#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "riesz/mesh.hpp"
#include "riesz/operators.hpp"
#include "riesz/orlicz.hpp"

namespace riesz {

/// (n, alpha, p, q) with 0 < alpha < n, 1 < p <= q. Construction checks the
/// identities tying s(p) to the other exponents and throws
/// std::invalid_argument on a bad tuple.
class ExponentTuple {
 public:
  static constexpr double kTol = 1e-12;

  ExponentTuple(int n, double alpha, double p, double q);
  /// q from 1/p - 1/q = alpha/n; needs alpha p < n.
  static ExponentTuple sobolev(int n, double alpha, double p);

  int n() const { return n_; }
  double alpha() const { return alpha_; }
  double p() const { return p_; }
  double q() const { return q_; }
  double pPrime() const { return p_ / (p_ - 1.0); }
  double qPrime() const { return q_ / (q_ - 1.0); }
  /// 1 + q/p'
  double sp() const { return sp_; }
  /// 1 + p'/q, the conjugate exponent of s(p)
  double sqPrime() const { return sq_; }
  bool isSobolev() const { return sobolev_; }
  /// alpha/n + 1/q - 1/p, the power of |Q| in the mixed and bump constants.
  double cubeExponent() const { return alpha_ / n_ + 1.0 / q_ - 1.0 / p_; }

 private:
  int n_;
  double alpha_, p_, q_;
  double sp_, sq_;
  bool sobolev_;
};

struct RangeFlags {
  bool weak = false;    // (p'/q')(1 - alpha/n) >= 1
  bool strong = false;  // min(q/p, p'/q')(1 - alpha/n) >= 1
  double weakValue = 0.0;
  double strongValue = 0.0;
};

RangeFlags rangeConditions(const ExponentTuple& e);

/// Supremum of a per-cube quantity over a cube corpus.
struct CharacteristicReport {
  std::string name;
  double value = 0.0;  // +inf is a verdict, not an error
  std::optional<CubeRef> witness;
  std::optional<DyadicCube> witnessCube;
  std::size_t corpusSize = 0;
  std::size_t skipped = 0;  // cubes where the quantity is undefined
  /// Per-cube values in corpus order; NaN marks a skipped cube.
  std::vector<double> perCube;

  bool infinite() const { return value == std::numeric_limits<double>::infinity(); }
};

/// Average over every corpus cube of w^e, by direct cell summation. Negative
/// exponents give +inf on cubes meeting a zero cell.
std::vector<double> corpusPowerAverages(const StepFunction& w, double e,
                                        const CubeCorpus& corpus,
                                        Exec exec = Exec::Parallel);
/// Average of -log w; +inf on cubes meeting a zero cell.
std::vector<double> corpusNegLogAverages(const StepFunction& w,
                                         const CubeCorpus& corpus,
                                         Exec exec = Exec::Parallel);

// All characteristics take a corpus; the overloads without one scan every
// cube of every shift contained in the base box.

CharacteristicReport apConstant(const StepFunction& w, double p,
                                const CubeCorpus& corpus,
                                Exec exec = Exec::Parallel);
CharacteristicReport apConstant(const StepFunction& w, double p);

/// (avg w^q)^{1/q} (avg w^{-p'})^{1/p'}
CharacteristicReport apqConstant(const StepFunction& w, double p, double q,
                                 const CubeCorpus& corpus,
                                 Exec exec = Exec::Parallel);
CharacteristicReport apqConstant(const StepFunction& w, double p, double q);

/// (avg u)(avg sigma)^{r-1}
CharacteristicReport twoWeightAp(const StepFunction& u,
                                 const StepFunction& sigma, double r,
                                 const CubeCorpus& corpus,
                                 Exec exec = Exec::Parallel);
CharacteristicReport twoWeightAp(const StepFunction& u,
                                 const StepFunction& sigma, double r);

/// (1/w(Q)) int_Q M(chi_Q w), M the dyadic maximal function over all shifts.
/// M(chi_Q w) is constant on tick cells, so the integral is a finite sum.
CharacteristicReport fujiiWilson(const StepFunction& w, const CubeCorpus& corpus,
                                 Exec exec = Exec::Parallel);
CharacteristicReport fujiiWilson(const StepFunction& w);
/// The quotient for one cube given in ticks; NaN when w(Q) = 0.
double fujiiWilsonQuotient(const CubeIntegrator& integ, const TickBox& q);

/// exp(avg -log w) avg w
CharacteristicReport ainftyExp(const StepFunction& w, const CubeCorpus& corpus,
                               Exec exec = Exec::Parallel);
CharacteristicReport ainftyExp(const StepFunction& w);

/// |Q|^{alpha/n+1/q-1/p} (avg u)^{1/q} (avg sigma)^{1/p'}
CharacteristicReport mixedApqAlpha(const StepFunction& u,
                                   const StepFunction& sigma,
                                   const ExponentTuple& e,
                                   const CubeCorpus& corpus,
                                   Exec exec = Exec::Parallel);
CharacteristicReport mixedApqAlpha(const StepFunction& u,
                                   const StepFunction& sigma,
                                   const ExponentTuple& e);

/// |Q|^{alpha/n+1/q-1/p} ||u^{1/q}||_{Phi,Q} ||sigma^{1/p'}||_{Psi,Q}.
/// Psi defaults to t^{p'}.
CharacteristicReport bumpConstant(const StepFunction& u,
                                  const StepFunction& sigma,
                                  const ExponentTuple& e,
                                  const YoungFunction& phi,
                                  const std::optional<YoungFunction>& psi,
                                  const CubeCorpus& corpus,
                                  Exec exec = Exec::Parallel);
CharacteristicReport bumpConstant(const StepFunction& u,
                                  const StepFunction& sigma,
                                  const ExponentTuple& e,
                                  const YoungFunction& phi,
                                  const std::optional<YoungFunction>& psi = {});

/// Weight generators, "kind:key=value,...":
///   constant:c=1
///   power:center=0.5,beta=0.3,floor=auto   |x - center|^beta, distance floored
///                                           (auto = 2^{-L}); cy= sets the
///                                           second center coordinate
///   twovalue:a=2,b=1,split=0.5             a where x_0 < split, else b;
///                                           b = 0 allowed
///   martingale:seed=42,vol=0.3             multiplicative dyadic cascade
///   checkerboard:levels=2,ratio=4          ratio on odd cubes of that level
/// Values are taken at cell centers. Throws std::invalid_argument on a bad
/// string, on beta <= -n and on vol outside [0, 1/2).
StepFunction generateWeight(const Mesh& mesh, const std::string& spec);

}  // namespace riesz
