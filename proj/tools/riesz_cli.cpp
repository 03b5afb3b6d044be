#include <CLI11.hpp>
#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "riesz/mesh.hpp"
#include "riesz/normest.hpp"
#include "riesz/operators.hpp"
#include "riesz/orlicz.hpp"
#include "riesz/serialize.hpp"
#include "riesz/sparse.hpp"
#include "riesz/spec_string.hpp"
#include "riesz/weights.hpp"

namespace fs = std::filesystem;
using namespace riesz;

namespace {

enum Exit { kOk = 0, kFail = 1, kConfig = 2, kInfOnly = 3 };

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PairSpec {
  std::string u, sigma;
  bool operator==(const PairSpec&) const = default;
};

// Every field has a default; a config file overrides some, flags override
// the file. The resolved config is written next to the outputs and reproduces
// them when fed back with --config.
struct ExperimentConfig {
  int n = 1, J = 0, L = 8, T = 3;
  double alpha = 0.5, p = 4.0 / 3.0;
  std::optional<double> q;  // Sobolev q when absent
  std::uint64_t seed = 0;
  std::optional<int> count;  // generated instances; 8, or 16 for calibrate
  std::vector<std::string> weights;
  std::vector<PairSpec> pairs;
  std::vector<std::string> constants{"Ap:p=2", "Apq", "FW", "Ainfty"};
  std::vector<std::string> suites{"sparsity", "domination", "overlap", "corona"};
  std::vector<Json> families;  // verify: fixed families to certify
  std::string family = "sparse";  // or "root": the single cube [0,1)^n
  std::vector<double> betas{0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
  double delta = 1.0;
  std::string out = "riesz_out";

  bool operator==(const ExperimentConfig&) const = default;

  Mesh mesh() const { return Mesh(n, J, L, T); }
  ExponentTuple exponents() const {
    return q ? ExponentTuple(n, alpha, p, *q) : ExponentTuple::sobolev(n, alpha, p);
  }
  int instances(int fallback = 8) const { return count.value_or(fallback); }
};

Json toJson(const ExperimentConfig& c) {
  Json pairs = Json::array();
  for (const auto& pr : c.pairs) pairs.push_back({{"u", pr.u}, {"sigma", pr.sigma}});
  Json j{{"mesh", {{"n", c.n}, {"J", c.J}, {"L", c.L}, {"T", c.T}}},
         {"exponents", {{"alpha", c.alpha}, {"p", c.p}}}};
  if (c.q) j["exponents"]["q"] = *c.q;
  j["seed"] = c.seed;
  if (c.count) j["count"] = *c.count;
  j["weights"] = c.weights;
  j["pairs"] = pairs;
  j["constants"] = c.constants;
  j["suites"] = c.suites;
  j["families"] = c.families;
  j["family"] = c.family;
  j["betas"] = c.betas;
  j["delta"] = c.delta;
  j["out"] = c.out;
  return j;
}

void requireKeys(const Json& j, std::initializer_list<const char*> allowed,
                 const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [k, v] : j.items())
    if (std::find_if(allowed.begin(), allowed.end(),
                     [&](const char* a) { return k == a; }) == allowed.end())
      throw ConfigError("unknown key '" + k + "' in " + where);
}

ExperimentConfig configFromJson(const Json& j) {
  requireKeys(j, {"mesh", "exponents", "seed", "count", "weights", "pairs",
                  "constants", "suites", "families", "family", "betas", "delta", "out"},
              "config");
  ExperimentConfig c;
  try {
    if (j.contains("mesh")) {
      const Json& m = j["mesh"];
      requireKeys(m, {"n", "J", "L", "T"}, "mesh");
      c.n = m.value("n", c.n);
      c.J = m.value("J", c.J);
      c.L = m.value("L", c.L);
      c.T = m.value("T", c.T);
    }
    if (j.contains("exponents")) {
      const Json& e = j["exponents"];
      requireKeys(e, {"alpha", "p", "q"}, "exponents");
      c.alpha = e.value("alpha", c.alpha);
      c.p = e.value("p", c.p);
      if (e.contains("q")) c.q = e["q"].get<double>();
    }
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("count")) c.count = j["count"].get<int>();
    if (j.contains("weights")) c.weights = j["weights"].get<std::vector<std::string>>();
    if (j.contains("pairs"))
      for (const Json& pr : j["pairs"]) {
        requireKeys(pr, {"u", "sigma"}, "pair");
        c.pairs.push_back({pr.at("u").get<std::string>(), pr.value("sigma", "dual")});
      }
    if (j.contains("constants")) c.constants = j["constants"].get<std::vector<std::string>>();
    if (j.contains("suites")) c.suites = j["suites"].get<std::vector<std::string>>();
    else c.suites.clear();
    if (j.contains("families")) c.families = j["families"].get<std::vector<Json>>();
    if (j.contains("family")) c.family = j["family"].get<std::string>();
    if (j.contains("betas")) c.betas = j["betas"].get<std::vector<double>>();
    if (j.contains("delta")) c.delta = j["delta"].get<double>();
    if (j.contains("out")) c.out = j["out"].get<std::string>();
  } catch (const Json::exception& e) {
    throw ConfigError(e.what());
  }
  if (c.family != "sparse" && c.family != "root")
    throw ConfigError("family must be 'sparse' or 'root'");
  for (const auto& s : c.suites)
    if (s != "sparsity" && s != "domination" && s != "overlap" && s != "corona")
      throw ConfigError("unknown suite '" + s + "'");
  return c;
}

// "n=1,J=0,L=8,T=3"; unspecified keys keep their value
void applyMeshFlag(ExperimentConfig& c, const std::string& text) {
  SpecString s;
  try {
    s = SpecString::parse("mesh:" + text);
    s.requireOnly("n,J,L,T");
  } catch (const std::exception& e) {
    throw ConfigError(std::string("--mesh: ") + e.what());
  }
  auto get = [&](const char* k, int& slot) {
    if (!s.has(k)) return;
    const double v = s.number(k);
    if (v != std::floor(v)) throw ConfigError(std::string("--mesh: ") + k + " must be an integer");
    slot = static_cast<int>(v);
  };
  get("n", c.n);
  get("J", c.J);
  get("L", c.L);
  get("T", c.T);
}

// --- output helpers ---------------------------------------------------------

std::string num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csvField(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string o = "\"";
  for (char ch : s) o += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return o + "\"";
}

class Csv {
 public:
  explicit Csv(std::vector<std::string> header) { row(header); }
  void row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i)
      text_ += (i ? "," : "") + csvField(fields[i]);
    text_ += "\n";
  }
  const std::string& text() const { return text_; }

 private:
  std::string text_;
};

void writeFile(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void writeJson(const fs::path& path, const Json& j) { writeFile(path, j.dump(2) + "\n"); }

std::string indexed(const std::string& stem, std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "_%03zu", i);
  return stem + buf + ".json";
}

Json cubeJson(const std::optional<DyadicCube>& q, int n) {
  return q ? riesz::toJson(*q, n) : Json();
}

std::string cubeText(const std::optional<DyadicCube>& q, int n) {
  return q ? toString(*q, n) : "";
}

// Runs fn(i) for i < count on up to `jobs` threads; results land by index so
// the merge order never depends on scheduling. The first exception by index
// is rethrown.
template <class T, class Fn>
std::vector<T> runIndexed(int count, int jobs, Fn&& fn) {
  std::vector<std::optional<T>> slots(count);
  std::vector<std::exception_ptr> errors(count);
#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, jobs)) if (jobs > 1)
  for (int i = 0; i < count; ++i) {
    try {
      slots[i].emplace(fn(i));
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  std::vector<T> out;
  for (int i = 0; i < count; ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
    out.push_back(std::move(*slots[i]));
  }
  return out;
}

// --- instances --------------------------------------------------------------

StepFunction sigmaFor(const StepFunction& u, const std::string& spec, const ExponentTuple& e) {
  if (spec == "dual") return u.power(1.0 - e.pPrime());
  if (spec.rfind("u^", 0) == 0) {
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(spec.substr(2), &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != spec.size() - 2)
      throw std::invalid_argument("bad sigma spec '" + spec + "'");
    return u.power(x);
  }
  return generateWeight(u.mesh(), spec);
}

std::vector<PairSpec> resolvePairs(const ExperimentConfig& c) {
  if (!c.pairs.empty()) return c.pairs;
  std::vector<PairSpec> out;
  for (const auto& pr : sandwichCorpus(c.mesh(), c.exponents(), c.seed, c.instances()))
    out.push_back({pr.uSpec, pr.sigmaSpec});
  return out;
}

std::vector<std::string> resolveWeights(const ExperimentConfig& c) {
  if (!c.weights.empty()) return c.weights;
  std::vector<std::string> out;
  for (const auto& pr : resolvePairs(c)) out.push_back(pr.u);
  return out;
}

SparseFamily familyFor(const ExperimentConfig& c, const StepFunction& u) {
  if (c.family == "root") {
    const DyadicCube unit{0, -c.J, {0, 0}};
    return SparseFamily::fromCubes(u.mesh(), 0, std::span<const DyadicCube>(&unit, 1));
  }
  return buildSparse(u, 0u).family;
}

// Random density for the exact suites: heavy-tailed so families run deep.
StepFunction randomDensity(const Mesh& m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> v(m.cellCount());
  for (double& x : v) x = 0.01 + 16.0 * std::pow(unitDouble(rng()), 4.0);
  return StepFunction(m, std::move(v));
}

std::uint64_t instanceSeed(std::uint64_t seed, std::size_t i) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(i)};
  std::uint32_t w[2];
  seq.generate(w, w + 2);
  return (static_cast<std::uint64_t>(w[0]) << 32) | w[1];
}

// --- constants ----------------------------------------------------------------

CharacteristicReport characteristic(const std::string& name, const StepFunction& u,
                                    const ExponentTuple& e) {
  const SpecString s = SpecString::parse(name);
  if (s.kind == "Ap") {
    s.requireOnly("p");
    auto r = apConstant(u, s.number("p", e.p()));
    r.name = name;
    return r;
  }
  if (s.kind == "Apq") {
    s.requireOnly("");
    return apqConstant(u, e.p(), e.q());
  }
  if (s.kind == "Asp") {
    s.requireOnly("");
    auto r = apConstant(u, e.sp());
    r.name = name;
    return r;
  }
  if (s.kind == "FW") {
    s.requireOnly("");
    return fujiiWilson(u);
  }
  if (s.kind == "Ainfty") {
    s.requireOnly("");
    return ainftyExp(u);
  }
  if (s.kind == "mixed") {
    s.requireOnly("");
    return mixedApqAlpha(u, u.power(1.0 - e.pPrime()), e);
  }
  if (s.kind == "bump") {
    s.requireOnly("delta");
    return bumpConstant(u, u.power(1.0 - e.pPrime()), e,
                        YoungFunction::logBump(e.q(), s.number("delta", 1.0)));
  }
  throw std::invalid_argument("unknown constant '" + name + "'");
}

int cmdConstants(const ExperimentConfig& c, int jobs, const fs::path& out) {
  const Mesh mesh = c.mesh();
  const ExponentTuple e = c.exponents();
  const auto weights = resolveWeights(c);
  if (c.constants.empty()) std::cerr << "warning: no constants requested\n";
  using Reports = std::vector<CharacteristicReport>;
  const auto all = runIndexed<Reports>(static_cast<int>(weights.size()), jobs, [&](int i) {
    const StepFunction u = generateWeight(mesh, weights[i]);
    Reports rs;
    for (const auto& name : c.constants) rs.push_back(characteristic(name, u, e));
    return rs;
  });
  Csv csv({"weight", "constant", "value", "witness", "corpus", "skipped"});
  std::size_t finite = 0, total = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    Json reps = Json::array();
    for (std::size_t k = 0; k < all[i].size(); ++k) {
      const auto& r = all[i][k];
      Json rj = riesz::toJson(r, mesh.dim());
      rj["name"] = c.constants[k];
      reps.push_back(rj);
      csv.row({weights[i], c.constants[k], num(r.value), cubeText(r.witnessCube, mesh.dim()),
               std::to_string(r.corpusSize), std::to_string(r.skipped)});
      ++total;
      finite += !r.infinite();
    }
    writeJson(out / "constants" / indexed("weight", i),
              {{"weight", weights[i]}, {"exponents", riesz::toJson(e)},
               {"seed", c.seed}, {"constants", reps}});
  }
  writeFile(out / "constants.csv", csv.text());
  if (total > 0 && finite == 0) {
    std::cerr << "warning: every reported constant is +inf\n";
    return kInfOnly;
  }
  return kOk;
}

// --- verify -------------------------------------------------------------------

struct Check {
  std::string suite, lemma, instance;
  bool ok = true;
  std::string witness;
  Json detail;
};

const char* lemmaName(const std::string& suite) {
  if (suite == "sparsity") return "sparsity: |union of strict sub-members of Q| <= |Q|/2";
  if (suite == "domination")
    return "sparse domination: I^D f <= 2^{n+1}/(1-2^{-alpha}) I^S f cellwise";
  if (suite == "overlap") return "overlap level set: |{x in R0 : count > k}| <= 2^{-k}|R0|";
  return "corona invariants: slices, stopping, reverse inequality, b-slices, partition";
}

Check sparsityCheck(const SparseFamily& s, const std::string& instance) {
  const int n = s.mesh().dim();
  const SparseCertificate cert = verifySparse(s);
  Check ch{"sparsity", lemmaName("sparsity"), instance, cert.ok(), "", riesz::toJson(cert, s)};
  if (cert.violation) ch.witness = toString(s.grid().cube(*cert.violation), n);
  else if (!cert.disjoint) ch.witness = "E(Q) measures";
  return ch;
}

std::vector<Check> verifyInstance(const ExperimentConfig& c, std::size_t i) {
  const Mesh mesh = c.mesh();
  const ExponentTuple e = c.exponents();
  const int n = mesh.dim();
  const std::uint64_t s0 = instanceSeed(c.seed, i);
  const StepFunction f = randomDensity(mesh, s0);
  const std::string name = "random[" + std::to_string(i) + "]";
  auto wants = [&](const char* s) {
    return std::find(c.suites.begin(), c.suites.end(), s) != c.suites.end();
  };
  std::vector<Check> out;
  for (unsigned t = 0; t < mesh.shiftCount(); ++t) {
    const std::string inst = name + "/shift" + std::to_string(t);
    const SparseFamily s = buildSparse(f, t).family;
    if (wants("sparsity")) out.push_back(sparsityCheck(s, inst));
    if (wants("domination")) {
      const DominationCheck d = checkDomination(f, c.alpha, s);
      const auto ctr = mesh.cellCenter(d.worstCell);
      std::string where = "cell " + std::to_string(d.worstCell) + " at x=" + num(ctr[0]);
      if (n == 2) where += ",y=" + num(ctr[1]);
      out.push_back({"domination", lemmaName("domination"), inst, d.violations == 0,
                     d.violations ? where : "",
                     {{"constant", d.constant}, {"violations", d.violations},
                      {"worstRatio", number(d.worstRatio)}, {"worstCell", d.worstCell}}});
    }
    if (wants("overlap")) {
      Check ch{"overlap", lemmaName("overlap"), inst, true, "", Json()};
      double worst = 0.0;
      for (std::size_t r : s.members())
        for (int k = 1; k <= 12; ++k) {
          const OverlapLevelSet ol = overlapLevelSet(s, r, k);
          worst = std::max(worst, std::ldexp(ol.ratio(), k));
          if (!ol.withinBound(k) && ch.ok) {
            ch.ok = false;
            ch.witness = toString(s.grid().cube(r), n) + " k=" + std::to_string(k);
          }
        }
      ch.detail = {{"roots", s.size()}, {"kmax", 12}, {"worstScaledRatio", worst}};
      out.push_back(std::move(ch));
    }
    if (wants("corona") && t == 0) {
      const StepFunction sigma =
          generateWeight(mesh, "martingale:seed=" + std::to_string(s0 % 1000003) + ",vol=0.4");
      for (std::size_t slot = 0; slot < s.size(); ++slot) {
        if (s.treeParent(slot) >= 0) continue;
        const std::size_t root = s.members()[slot];
        for (SliceMode mode : {SliceMode::Sobolev, SliceMode::Fractional}) {
          const auto cd = coronaDecompose(s, root, f, sigma, e, mode);
          const CoronaCertificate cert = certifyCorona(cd, s, f, sigma);
          const std::string m = mode == SliceMode::Sobolev ? "sobolev" : "fractional";
          out.push_back({"corona", lemmaName("corona"),
                         inst + "/root" + toString(s.grid().cube(root), n) + "/" + m, cert.ok(),
                         cert.firstFailure,
                         {{"sliceMembership", cert.sliceMembership},
                          {"stoppingInequality", cert.stoppingInequality},
                          {"reverseInequality", cert.reverseInequality},
                          {"bSlices", cert.bSlices},
                          {"partition", cert.partition},
                          {"cubes", cd.cubes.size()},
                          {"unassigned", cd.unassigned.size()}}});
        }
      }
    }
  }
  return out;
}

Json checkJson(const Check& ch) {
  return {{"suite", ch.suite}, {"lemma", ch.lemma}, {"instance", ch.instance},
          {"ok", ch.ok},       {"witness", ch.witness}, {"detail", ch.detail}};
}

int cmdVerify(const ExperimentConfig& c, int jobs, const fs::path& out) {
  if (c.suites.empty() && c.families.empty()) {
    std::cerr << "warning: nothing to verify (no suites, no families)\n";
    writeFile(out / "verify.csv", Csv({"suite", "instance", "ok", "witness"}).text());
    return kOk;
  }
  const int count = c.suites.empty() ? 0 : c.instances();
  auto groups = runIndexed<std::vector<Check>>(count, jobs, [&](int i) {
    return verifyInstance(c, static_cast<std::size_t>(i));
  });
  for (std::size_t k = 0; k < c.families.size(); ++k) {
    const SparseFamily s = familyFromJson(c.families[k]);
    groups.push_back({sparsityCheck(s, "family[" + std::to_string(k) + "]")});
  }
  Csv csv({"suite", "instance", "ok", "witness"});
  bool allOk = true;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    Json arr = Json::array();
    for (const Check& ch : groups[g]) {
      arr.push_back(checkJson(ch));
      csv.row({ch.suite, ch.instance, ch.ok ? "pass" : "FAIL", ch.witness});
      if (!ch.ok) {
        allOk = false;
        std::cerr << "FAIL " << ch.lemma << " | instance " << ch.instance << " | witness "
                  << ch.witness << "\n";
      }
    }
    const bool fixture = static_cast<int>(g) >= count;
    writeJson(out / "verify" /
                  indexed(fixture ? "family" : "instance", fixture ? g - count : g),
              {{"seed", c.seed}, {"checks", arr}});
  }
  writeFile(out / "verify.csv", csv.text());
  std::cout << (allOk ? "verify: pass\n" : "verify: FAIL\n");
  return allOk ? kOk : kFail;
}

// --- sandwich / norm / sparse / corona -----------------------------------------

Json ratioJson(const BoundRatio& b) {
  Json j{{"testing", number(b.testing)}, {"bound", number(b.bound)},
         {"ratio", number(b.ratio)}, {"skipped", b.skipped}};
  if (!b.reason.empty()) j["reason"] = b.reason;
  return j;
}

template <class Fn>
Json refusable(Fn&& fn) {
  try {
    return ratioJson(fn());
  } catch (const RangeRefusal& r) {
    return {{"refused", true}, {"reason", r.what()}};
  }
}

std::string ratioText(const Json& j) {
  if (j.contains("refused")) return "refused";
  return j.at("ratio").is_string() ? j.at("ratio").get<std::string>()
                                   : num(j.at("ratio").get<double>());
}

int cmdSandwich(const ExperimentConfig& c, int jobs, const fs::path& out) {
  const Mesh mesh = c.mesh();
  const ExponentTuple e = c.exponents();
  const auto pairs = resolvePairs(c);
  struct Row {
    Json j;
    SandwichRow row;
    double mixed;
  };
  const auto rows = runIndexed<Row>(static_cast<int>(pairs.size()), jobs, [&](int i) {
    const StepFunction u = generateWeight(mesh, pairs[i].u);
    const StepFunction sigma = sigmaFor(u, pairs[i].sigma, e);
    const SparseFamily s = familyFor(c, u);
    NormOptions opt;
    opt.seed = c.seed;
    const SandwichRow r = testingSandwich(u, sigma, e, s, opt);
    const double mixed = mixedApqAlpha(u, sigma, e).value;
    Json mb = Json::object();
    try {
      const MixedBoundCheck t = mixedBoundCheck(u, sigma, e, s);
      mb = {{"dual", ratioJson(t.dual)}, {"direct", ratioJson(t.direct)}};
    } catch (const RangeRefusal& rr) {
      mb = {{"refused", true}, {"reason", rr.what()}};
    }
    Json j{{"u", pairs[i].u},
           {"sigma", pairs[i].sigma},
           {"exponents", riesz::toJson(e)},
           {"seed", c.seed},
           {"family", {{"kind", c.family}, {"size", s.size()}}},
           {"constants",
            {{"strong", number(r.strong)}, {"weak", number(r.weak)},
             {"direct", number(r.direct)}, {"dual", number(r.dual)},
             {"mixed", number(mixed)}}},
           {"ratios",
            {{"r1", number(r.r1)},
             {"r2", number(r.r2)},
             {"mixed", mb},
             {"bump", refusable([&] {
                return bumpBoundCheck(u, sigma, e, s, BumpKind::Log, c.delta);
              })},
             {"bumpLogLog", refusable([&] {
                return bumpBoundCheck(u, sigma, e, s, BumpKind::LogLog, c.delta);
              })}}},
           {"witnesses", {{"direct", cubeJson(r.directWitness, mesh.dim())}}},
           {"skipped", r.skipped},
           {"testingBelowNorm", r.testingBelowNorm}};
    return Row{std::move(j), r, mixed};
  });
  Csv csv({"index", "u", "sigma", "strong", "weak", "direct", "dual", "r1", "r2", "mixed",
           "mixedSym", "bump", "bumpLogLog", "testingBelowNorm"});
  Csv plot({"x", "y"});
  bool ok = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Row& r = rows[i];
    writeJson(out / "sandwich" / indexed("pair", i), r.j);
    const Json& mb = r.j["ratios"]["mixed"];
    const bool refused = mb.contains("refused");
    csv.row({std::to_string(i), pairs[i].u, pairs[i].sigma, num(r.row.strong), num(r.row.weak),
             num(r.row.direct), num(r.row.dual), num(r.row.r1), num(r.row.r2),
             refused ? "refused" : ratioText(mb["dual"]),
             refused ? "refused" : ratioText(mb["direct"]),
             ratioText(r.j["ratios"]["bump"]), ratioText(r.j["ratios"]["bumpLogLog"]),
             r.row.testingBelowNorm ? "1" : "0"});
    if (!r.row.skipped) plot.row({num(r.mixed), num(r.row.strong)});
    if (!r.row.testingBelowNorm) {
      ok = false;
      std::cerr << "FAIL testing <= strong norm lower bound | instance pair[" << i
                << "] | witness " << cubeText(r.row.directWitness, mesh.dim()) << "\n";
    }
  }
  writeFile(out / "sandwich.csv", csv.text());
  writeFile(out / "sandwich_plot.csv", plot.text());
  return ok ? kOk : kFail;
}

Json estimateJson(const NormEstimate& est) {
  Json hist = Json::array();
  for (double h : est.history) hist.push_back(number(h));
  return {{"value", number(est.value)}, {"seed", est.seed},         {"seedSet", est.seedSet},
          {"iterations", est.iterations}, {"converged", est.converged},
          {"degenerate", est.degenerate}, {"history", hist}};
}

int cmdNorm(const ExperimentConfig& c, int jobs, const fs::path& out) {
  const Mesh mesh = c.mesh();
  const ExponentTuple e = c.exponents();
  const auto pairs = resolvePairs(c);
  using Res = std::pair<NormEstimate, NormEstimate>;
  const auto res = runIndexed<Res>(static_cast<int>(pairs.size()), jobs, [&](int i) {
    const StepFunction u = generateWeight(mesh, pairs[i].u);
    const StepFunction sigma = sigmaFor(u, pairs[i].sigma, e);
    const SparseFamily s = familyFor(c, u);
    const LinearOperator T = sparseOperator(s, e.alpha());
    NormOptions opt;
    opt.seed = c.seed;
    opt.family = &s;
    const TestingReport t = dyadicTesting(u, sigma, e, s);
    if (t.directWitness) opt.extraCubes.push_back(*t.directWitness);
    NormEstimate strong = strongNormLower(u, sigma, e, T, opt);
    NormEstimate weak = weakNormLower(u, sigma, e, T, opt, &strong);
    return Res{std::move(strong), std::move(weak)};
  });
  Csv csv({"index", "u", "sigma", "strong", "weak", "strongSeed", "weakSeed", "iterations",
           "converged"});
  for (std::size_t i = 0; i < res.size(); ++i) {
    const auto& [st, wk] = res[i];
    writeJson(out / "norm" / indexed("pair", i),
              {{"u", pairs[i].u}, {"sigma", pairs[i].sigma}, {"exponents", riesz::toJson(e)},
               {"seed", c.seed}, {"operator", c.family == "root" ? "I^S root" : "I^S sparse(u)"},
               {"strong", estimateJson(st)}, {"weak", estimateJson(wk)}});
    csv.row({std::to_string(i), pairs[i].u, pairs[i].sigma, num(st.value), num(wk.value),
             st.seed, wk.seed, std::to_string(st.iterations), st.converged ? "1" : "0"});
  }
  writeFile(out / "norm.csv", csv.text());
  return kOk;
}

int cmdSparse(const ExperimentConfig& c, int jobs, const fs::path& out) {
  const Mesh mesh = c.mesh();
  const auto weights = resolveWeights(c);
  const int shifts = static_cast<int>(mesh.shiftCount());
  const int total = static_cast<int>(weights.size()) * shifts;
  struct Res {
    Json j;
    std::vector<std::string> csv;
    bool ok;
  };
  const auto res = runIndexed<Res>(total, jobs, [&](int k) {
    const int i = k / shifts;
    const unsigned t = static_cast<unsigned>(k % shifts);
    const StepFunction f = generateWeight(mesh, weights[i]);
    const SparseFamily s = buildSparse(f, t).family;
    const SparseCertificate cert = verifySparse(s);
    const DominationCheck d = checkDomination(f, c.alpha, s);
    Json j{{"weight", weights[i]},
           {"alpha", c.alpha},
           {"family", riesz::toJson(s)},
           {"certificate", riesz::toJson(cert, s)},
           {"domination",
            {{"constant", d.constant}, {"violations", d.violations},
             {"worstRatio", number(d.worstRatio)}, {"worstCell", d.worstCell}}}};
    return Res{std::move(j),
               {weights[i], std::to_string(t), std::to_string(s.size()),
                cert.ok() ? "1" : "0", num(cert.worstRatio), std::to_string(d.violations),
                num(d.worstRatio)},
               cert.ok() && d.violations == 0};
  });
  Csv csv({"weight", "shift", "cubes", "sparse", "worstPacking", "violations",
           "worstDominationRatio"});
  bool ok = true;
  for (int k = 0; k < total; ++k) {
    writeJson(out / "sparse" / indexed("family", static_cast<std::size_t>(k)), res[k].j);
    csv.row(res[k].csv);
    ok = ok && res[k].ok;
  }
  writeFile(out / "sparse.csv", csv.text());
  return ok ? kOk : kFail;
}

int cmdCorona(const ExperimentConfig& c, int jobs, const fs::path& out) {
  const Mesh mesh = c.mesh();
  const ExponentTuple e = c.exponents();
  const auto pairs = resolvePairs(c);
  struct Res {
    Json j;
    std::vector<std::vector<std::string>> csv;
    bool ok;
  };
  const auto res = runIndexed<Res>(static_cast<int>(pairs.size()), jobs, [&](int i) {
    const StepFunction u = generateWeight(mesh, pairs[i].u);
    const StepFunction sigma = sigmaFor(u, pairs[i].sigma, e);
    const SparseFamily s = familyFor(c, u);
    Res r{{{"u", pairs[i].u}, {"sigma", pairs[i].sigma}, {"exponents", riesz::toJson(e)}},
          {},
          true};
    Json roots = Json::array();
    for (std::size_t slot = 0; slot < s.size(); ++slot) {
      if (s.treeParent(slot) >= 0) continue;
      const std::size_t root = s.members()[slot];
      for (SliceMode mode : {SliceMode::Sobolev, SliceMode::Fractional}) {
        const auto cd = coronaDecompose(s, root, u, sigma, e, mode);
        const CoronaCertificate cert = certifyCorona(cd, s, u, sigma);
        const DecayTable dt = sigmaDecayCheck(cd, sigma);
        double carl = 0.0;
        for (const auto& row : coronaCarleson(cd, u)) carl = std::max(carl, row.worstRatio);
        Json rows = Json::array();
        for (const DecayRow& row : dt.rows)
          rows.push_back({{"a", row.a}, {"P", riesz::toJson(s.grid().cube(row.P), mesh.dim())},
                          {"b", row.b}, {"k", row.k}, {"ratio", number(row.ratio)},
                          {"bound", number(row.bound)}});
        const std::string m = mode == SliceMode::Sobolev ? "sobolev" : "fractional";
        roots.push_back({{"mode", m},
                         {"decomposition", riesz::toJson(cd)},
                         {"certificate",
                          {{"ok", cert.ok()}, {"firstFailure", cert.firstFailure}}},
                         {"decay",
                          {{"gamma", number(dt.gamma)}, {"constant", number(dt.constant)},
                           {"asserted", dt.asserted}, {"ok", dt.ok},
                           {"fittedRate", number(dt.fittedRate)}, {"rows", rows}}},
                         {"carlesonWorstRatio", number(carl)}});
        r.csv.push_back({std::to_string(i), toString(s.grid().cube(root), mesh.dim()), m,
                         std::to_string(cd.cubes.size()), std::to_string(cd.slices.size()),
                         cert.ok() ? "1" : "0", dt.asserted ? (dt.ok ? "1" : "0") : "n/a",
                         num(dt.fittedRate), num(carl)});
        r.ok = r.ok && cert.ok() && dt.ok;
      }
    }
    r.j["roots"] = roots;
    return r;
  });
  Csv csv({"pair", "root", "mode", "cubes", "slices", "certified", "decayOk", "fittedRate",
           "carlesonWorstRatio"});
  bool ok = true;
  for (std::size_t i = 0; i < res.size(); ++i) {
    writeJson(out / "corona" / indexed("pair", i), res[i].j);
    for (const auto& row : res[i].csv) csv.row(row);
    ok = ok && res[i].ok;
  }
  writeFile(out / "corona.csv", csv.text());
  return ok ? kOk : kFail;
}

// log(weak norm) against log([u]_{A_{s(p)}}) over power weights u = |x - 1/2|^beta,
// one-weight pairs: u = w^q, sigma = w^{-p'}.
int cmdExponentFit(const ExperimentConfig& c, int jobs, const fs::path& out) {
  const Mesh mesh = c.mesh();
  const ExponentTuple e = c.exponents();
  struct Pt {
    double beta, A, norm;
  };
  const auto pts = runIndexed<Pt>(static_cast<int>(c.betas.size()), jobs, [&](int i) {
    const std::string spec = "power:center=0.5,beta=" + num(c.betas[i]);
    const StepFunction u = generateWeight(mesh, spec);
    const StepFunction sigma = u.power(-e.pPrime() / e.q());
    const SparseFamily s = familyFor(c, u);
    NormOptions opt;
    opt.seed = c.seed;
    opt.family = &s;
    const double A = apConstant(u, e.sp()).value;
    const double w = weakNormLower(u, sigma, e, sparseOperator(s, e.alpha()), opt).value;
    return Pt{c.betas[i], A, w};
  });
  Csv plot({"x", "y"});
  Json points = Json::array();
  std::vector<std::pair<double, double>> xy;
  for (const Pt& p : pts) {
    points.push_back({{"beta", p.beta}, {"Asp", number(p.A)}, {"weakNorm", number(p.norm)}});
    if (std::isfinite(p.A) && p.A > 0.0 && p.norm > 0.0) {
      xy.emplace_back(std::log(p.A), std::log(p.norm));
      plot.row({num(xy.back().first), num(xy.back().second)});
    }
  }
  Json fit{{"reference", 1.0 - e.alpha() / e.n()}};
  double mx = 0.0, my = 0.0;
  for (auto [x, y] : xy) mx += x, my += y;
  double sxx = 0.0, sxy = 0.0;
  if (!xy.empty()) {
    mx /= xy.size();
    my /= xy.size();
    for (auto [x, y] : xy) sxx += (x - mx) * (x - mx), sxy += (x - mx) * (y - my);
  }
  if (xy.size() < 2 || sxx <= 0.0) {
    fit["skipped"] = true;
    fit["reason"] = "fewer than two distinct points";
    fit["slope"] = nullptr;
  } else {
    fit["skipped"] = false;
    fit["slope"] = sxy / sxx;
    fit["intercept"] = my - sxy / sxx * mx;
  }
  writeJson(out / "exponent_fit.json", {{"exponents", riesz::toJson(e)}, {"seed", c.seed},
                                        {"points", points}, {"fit", fit}});
  writeFile(out / "exponent_fit.csv", plot.text());
  return kOk;
}

int cmdCalibrate(const ExperimentConfig& c, int, const fs::path& out) {
  CalibrationSetup s;
  s.n = c.n;
  s.J = c.J;
  s.L = c.L;
  s.T = c.T;
  s.alpha = c.alpha;
  s.p = c.p;
  s.count = c.instances(16);
  s.delta = c.delta;
  const Envelope env = measureEnvelope(s, c.seed);
  writeJson(out / "calibration.json",
            {{"version", 1},
             {"seed", c.seed},
             {"setup",
              {{"n", s.n}, {"J", s.J}, {"L", s.L}, {"T", s.T}, {"alpha", s.alpha},
               {"p", s.p}, {"count", s.count}, {"delta", s.delta}}},
             {"envelope",
              {{"mixed", number(env.mixed)}, {"mixedSym", number(env.mixedSym)},
               {"bump", number(env.bump)}, {"bumpLogLog", number(env.bumpLogLog)},
               {"r1", number(env.r1)}, {"r2Lo", number(env.r2Lo)},
               {"r2Hi", number(env.r2Hi)}, {"dyadicLower", number(env.dyadicLower)},
               {"fracMaximal", number(env.fracMaximal)}}}});
  return kOk;
}

const char* kFooter = R"(
Config (--config FILE, one JSON object; every key optional):
  mesh       {"n":1,"J":0,"L":8,"T":3}
  exponents  {"alpha":0.5,"p":1.3333333333333333}  q defaults to the Sobolev q
  seed       integer; all generated corpora derive from it
  count      generated instances (default 8; calibrate 16)
  weights    ["power:center=0.5,beta=0.3", ...]   constants, sparse
  pairs      [{"u":"...","sigma":"dual"|"u^x"|weight}, ...]
             sandwich, norm, corona; default: the seeded corpus
  constants  ["Ap:p=2","Apq","Asp","FW","Ainfty","mixed","bump:delta=1"]
  suites     subset of ["sparsity","domination","overlap","corona"]
  families   sparse families to certify in verify ({"mesh","shift","cubes"})
  family     "sparse" (built from u) or "root" (the single cube [0,1)^n)
  betas      power exponents for exponent-fit
  delta      bump order for the log and loglog bumps
  out        output directory
Flags override the file. Without --config, verify runs every suite; a config
file runs only the suites and families it lists (none: a no-op with warning).

Weight specs: constant:c=1 | power:center=0.5,beta=0.3,floor=auto,cy=0.5 |
  twovalue:a=2,b=1,split=0.5 | martingale:seed=42,vol=0.3 |
  checkerboard:levels=2,ratio=4

Exit codes: 0 ok, 1 an exact assertion failed, 2 bad config or arguments,
  3 constants produced only +inf verdicts.)";

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dyadic and sparse Riesz potential experiments"};
  app.require_subcommand(1);
  app.footer(kFooter);
  std::string configPath, meshText, outDir;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  app.add_option("--config", configPath, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "RNG seed (overrides config)");
  app.add_option("--jobs", jobs, "experiments run in parallel")->check(CLI::PositiveNumber);
  app.add_option("--out", outDir, "output directory (overrides config)");
  app.add_option("--mesh", meshText, "mesh, e.g. n=1,J=0,L=8,T=3");

  using Cmd = int (*)(const ExperimentConfig&, int, const fs::path&);
  const std::vector<std::tuple<const char*, const char*, Cmd>> cmds{
      {"constants", "weight characteristics per weight, JSON + CSV", cmdConstants},
      {"verify", "exact lemma suites; exit 1 on any failure", cmdVerify},
      {"sandwich", "testing constants, norm bounds and theorem ratios", cmdSandwich},
      {"sparse", "sparse families with certificates", cmdSparse},
      {"corona", "corona decompositions, decay tables, Carleson checks", cmdCorona},
      {"norm", "strong and weak norm lower bounds for I^S", cmdNorm},
      {"exponent-fit", "slope of log norm against log [u]_{A_{s(p)}}", cmdExponentFit},
      {"calibrate", "measure the envelope constants and write calibration.json", cmdCalibrate}};
  for (const auto& [name, desc, fn] : cmds) {
    auto* sub = app.add_subcommand(name, desc);
    sub->fallthrough();
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  ExperimentConfig cfg;
  try {
    if (!configPath.empty()) {
      std::ifstream in(configPath);
      Json j;
      try {
        j = Json::parse(in);
      } catch (const Json::exception& e) {
        throw ConfigError(std::string("config parse: ") + e.what());
      }
      cfg = configFromJson(j);
    }
    if (seed) cfg.seed = *seed;
    if (!meshText.empty()) applyMeshFlag(cfg, meshText);
    if (!outDir.empty()) cfg.out = outDir;
    (void)cfg.mesh();
    (void)cfg.exponents();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfig;
  }

  for (const auto& [name, desc, fn] : cmds) {
    if (!app.got_subcommand(name)) continue;
    const fs::path out = cfg.out;
    try {
      writeJson(out / "config.json", toJson(cfg));
      return fn(cfg, jobs, out);
    } catch (const std::invalid_argument& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kConfig;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kFail;
    }
  }
  return kConfig;
}
