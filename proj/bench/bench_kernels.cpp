// Serial vs OpenMP timings of the main kernels. Each row also reports the
// largest relative difference between the two paths.
//   bench_kernels [L=10] [reps=3]

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>

#include "riesz/mesh.hpp"
#include "riesz/operators.hpp"
#include "riesz/sparse.hpp"
#include "riesz/weights.hpp"

using namespace riesz;

namespace {

double seconds(const std::function<void()>& fn, int reps) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
  }
  return best;
}

double maxRelDiff(const StepFunction& a, const StepFunction& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double s = std::max(std::abs(a[i]), std::abs(b[i]));
    if (s > 0.0) d = std::max(d, std::abs(a[i] - b[i]) / s);
  }
  return d;
}

void row(const char* name, const std::function<StepFunction(Exec)>& fn, int reps) {
  StepFunction s = fn(Exec::Serial), p = fn(Exec::Parallel);
  const double ts = seconds([&] { s = fn(Exec::Serial); }, reps);
  const double tp = seconds([&] { p = fn(Exec::Parallel); }, reps);
  std::printf("%-28s %10.4f %10.4f %8.2fx %10.2e\n", name, ts, tp, ts / tp, maxRelDiff(s, p));
}

}  // namespace

int main(int argc, char** argv) {
  const int L = argc > 1 ? std::atoi(argv[1]) : 10;
  const int reps = argc > 2 ? std::atoi(argv[2]) : 3;
  const Mesh m1(1, 0, L, 3);
  const Mesh m2(2, 0, std::min(L, 6), 3);
  std::mt19937_64 rng(1);
  auto randomF = [&](const Mesh& m) {
    std::vector<double> v(m.cellCount());
    for (double& x : v) x = 0.01 + std::ldexp(static_cast<double>(rng() >> 11), -53);
    return StepFunction(m, std::move(v));
  };
  const StepFunction f1 = randomF(m1), f2 = randomF(m2);
  const StepFunction w1 = generateWeight(m1, "martingale:seed=7,vol=0.4");

  std::printf("threads %d, n=1 L=%d (%zu cells), n=2 L=%d (%zu cells)\n", omp_get_max_threads(),
              L, m1.cellCount(), m2.finestExponent(), m2.cellCount());
  std::printf("%-28s %10s %10s %9s %10s\n", "kernel", "serial s", "omp s", "speedup", "max rel");
  row("rieszReference n=1", [&](Exec e) { return rieszReference(f1, 0.5, KernelMode::Midpoint, e); },
      reps);
  row("rieszReference n=2", [&](Exec e) { return rieszReference(f2, 1.0, KernelMode::Midpoint, e); },
      reps);
  row("dyadicRiesz n=1", [&](Exec e) { return dyadicRiesz(f1, 0.5, 0u, e); }, reps);
  row("dyadicRiesz n=2", [&](Exec e) { return dyadicRiesz(f2, 1.0, 0u, e); }, reps);
  row("hlMaximal n=1", [&](Exec e) { return hlMaximal(f1, e); }, reps);
  row("hlMaximal n=2", [&](Exec e) { return hlMaximal(f2, e); }, reps);
  const DyadicGrid g1(m1, 0);
  row("fracMaximalWeighted n=1",
      [&](Exec e) { return fracMaximalWeighted(f1, w1, 0.5, g1, e); }, reps);
  const SparseFamily s1 = buildSparse(f1, 0u).family;
  row("sparseRiesz n=1",
      [&](Exec e) { return sparseRiesz(f1, 0.5, g1, s1.members(), e); }, reps);

  // characteristics and the sparse construction return scalars / families
  const CubeCorpus corpus = CubeCorpus::insideBox(m1);
  double vs = 0.0, vp = 0.0;
  const double ts = seconds([&] { vs = apConstant(w1, 2.0, corpus, Exec::Serial).value; }, reps);
  const double tp = seconds([&] { vp = apConstant(w1, 2.0, corpus, Exec::Parallel).value; }, reps);
  std::printf("%-28s %10.4f %10.4f %8.2fx %10.2e\n", "apConstant n=1", ts, tp, ts / tp,
              std::abs(vs - vp) / vs);
  std::size_t ns = 0, np = 0;
  const double bs = seconds([&] { ns = buildSparse(f1, 0u, Exec::Serial).family.size(); }, reps);
  const double bp = seconds([&] { np = buildSparse(f1, 0u, Exec::Parallel).family.size(); }, reps);
  std::printf("%-28s %10.4f %10.4f %8.2fx %10s\n", "buildSparse n=1", bs, bp, bs / bp,
              ns == np ? "same" : "DIFFER");
  return 0;
}
