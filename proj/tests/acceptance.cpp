// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <string>

#include "fixtures.hpp"
#include "tokmerge/analysis.hpp"
#include "tokmerge/baselines.hpp"
#include "tokmerge/benchmark.hpp"
#include "tokmerge/embedding_file.hpp"
#include "tokmerge/guidance.hpp"

namespace {

using namespace tokmerge;

constexpr double kExactTol = 1e-12;

constexpr double kCgsmBandLo = 0.7828;
constexpr double kCgsmBandHi = 0.7838;

constexpr std::uint64_t kMonteCarloTrials = 1000000;
constexpr double kMonteCarloTol = 0.002;

constexpr int kRandomInstances = 1000;
constexpr double kDominanceSlack = 1e-12;

constexpr double kBaselineGflops = 20.6;
constexpr double kBaselineRelTol = 0.10;
constexpr double kReducedGflops = 12.0;
constexpr double kReducedRelTol = 0.15;
constexpr double kMinReductionFraction = 0.35;

constexpr double kJsZeroTol = 1e-12;
constexpr double kJsSymmetryTol = 1e-12;
constexpr double kJsBoundSlack = 1e-12;
constexpr double kFdStep = 1e-5;
constexpr double kFdRelTol = 1e-3;
constexpr double kFdAbsFloor = 1e-9;

constexpr double kMaxSlope = 2.3;
constexpr double kMaxMicrosAt197 = 5000.0;

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(double v, int digits = 6) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

void require(Outcome& o, bool ok, const std::string& what) {
  if (!ok) {
    o.pass = false;
    if (!o.detail.empty()) o.detail += "; ";
    o.detail += what;
  }
}

Outcome criterion1() {
  Outcome o;
  const auto c1 = test::case1();
  const auto c2 = test::case2();
  const double cg1 = objective(c1, complete_graph_match(c1, 2));
  const double cg2 = objective(c2, complete_graph_match(c2, 2));
  const double bp1 = objective(c1, bipartite_soft_match(c1, 2));
  const double bp2 = objective(c2, bipartite_soft_match(c2, 2));
  const double op1 = exhaustive_optimal(c1, 2).s_star;
  const double op2 = exhaustive_optimal(c2, 2).s_star;
  require(o, std::abs(cg1 - 1.1) <= kExactTol, "cgsm case1 " + fmt(cg1));
  require(o, std::abs(cg2 - 1.7) <= kExactTol, "cgsm case2 " + fmt(cg2));
  require(o, std::abs(bp1 - 1.1) <= kExactTol, "bipartite case1 " + fmt(bp1));
  require(o, std::abs(bp2 - 1.3) <= kExactTol, "bipartite case2 " + fmt(bp2));
  require(o, std::abs(op1 - 1.1) <= kExactTol, "oracle case1 " + fmt(op1));
  require(o, std::abs(op2 - 1.7) <= kExactTol, "oracle case2 " + fmt(op2));
  if (o.pass) o.detail = "cgsm 1.1/1.7, bipartite 1.1/1.3, oracle 1.1/1.7";
  return o;
}

// Feasible r keeps every layer within the matchers' floor(m/2) bound; the
// last layer (fewest tokens) is the binding one.
Outcome criterion2() {
  Outcome o;
  const double ec = expectation_cgsm(197, 12, 16);
  const double eb = expectation_bipartite(197, 12, 16);
  require(o, ec >= kCgsmBandLo && ec <= kCgsmBandHi, "E^C(197,12,16)=" + fmt(ec, 10));
  require(o, eb == 0.5, "E^B(197,12,16)=" + fmt(eb, 17));
  std::size_t points = 0, failures = 0;
  std::string first;
  for (long n = 10; n <= 400; ++n) {
    for (long layers = 1; layers <= 24; ++layers) {
      for (long r = 1; n - layers * r >= 1; ++r) {
        if (2 * r > n - (layers - 1) * r) continue;
        ++points;
        const double diff = expectation_cgsm(n, layers, r) - expectation_bipartite(n, layers, r);
        if (!(diff > 0.0)) {
          if (failures++ == 0) {
            first = "(" + std::to_string(n) + "," + std::to_string(layers) + "," + std::to_string(r) +
                    ") diff=" + fmt(diff);
          }
        }
      }
    }
  }
  require(o, failures == 0,
          "E^C-E^B>0 fails at " + std::to_string(failures) + " of " + std::to_string(points) + " points, first " + first);
  if (o.pass) o.detail = "E^C=" + fmt(ec, 10) + ", E^B=0.5, " + std::to_string(points) + " grid points";
  return o;
}

Outcome criterion3() {
  Outcome o;
  const double ec = expectation_cgsm(197, 12, 16);
  const double eb = expectation_bipartite(197, 12, 16);
  const double mc = simulate_optimal_match_rate(197, 12, 16, kMonteCarloTrials, 2024, SimulationMethod::CompleteGraph);
  const double mb = simulate_optimal_match_rate(197, 12, 16, kMonteCarloTrials, 2024, SimulationMethod::Bipartite);
  require(o, std::abs(mc - ec) <= kMonteCarloTol, "cgsm MC " + fmt(mc) + " vs " + fmt(ec));
  require(o, std::abs(mb - eb) <= kMonteCarloTol, "bipartite MC " + fmt(mb) + " vs " + fmt(eb));
  o.detail = o.pass ? "|MC-E^C|=" + fmt(std::abs(mc - ec), 3) + ", |MC-E^B|=" + fmt(std::abs(mb - eb), 3) : o.detail;
  return o;
}

Outcome criterion4() {
  Outcome o;
  std::mt19937_64 rng(4);
  const Matcher matchers[] = {Matcher::Cgsm, Matcher::Bipartite, Matcher::Greedy, Matcher::Kmeans, Matcher::Random};
  double cgsm_sum = 0.0, bipartite_sum = 0.0;
  std::size_t violations = 0;
  for (int t = 0; t < kRandomInstances; ++t) {
    const std::size_t n = 4 + rng() % 7;
    const std::size_t r = 1 + rng() % std::min<std::size_t>(3, n / 2);
    const auto keys = test::random_tokens(n, 8, rng);
    const auto d = cosine_similarity_matrix(keys);
    const auto best = exhaustive_optimal(d, r);
    if (std::abs(best.s_star - test::subset_optimum(d, r)) > kExactTol) ++violations;
    for (Matcher m : matchers) {
      const auto result = run_matcher(m, d, &keys, r, {}, static_cast<std::uint64_t>(t));
      const double s = objective(d, result.plan);
      bool ok = s <= best.s_star + kDominanceSlack && result.plan.r() == r &&
                result.stacks.groups.size() == n - r;
      try {
        result.plan.validate();
      } catch (const Error&) {
        ok = false;
      }
      if (!ok) ++violations;
      if (m == Matcher::Cgsm) cgsm_sum += s;
      if (m == Matcher::Bipartite) bipartite_sum += s;
    }
  }
  const double cgsm_mean = cgsm_sum / kRandomInstances;
  const double bipartite_mean = bipartite_sum / kRandomInstances;
  require(o, violations == 0, std::to_string(violations) + " dominance/disjointness violations");
  require(o, cgsm_mean >= bipartite_mean, "mean cgsm " + fmt(cgsm_mean) + " < bipartite " + fmt(bipartite_mean));
  if (o.pass) {
    o.detail = std::to_string(kRandomInstances) + " instances, mean objective cgsm " + fmt(cgsm_mean, 4) +
               " >= bipartite " + fmt(bipartite_mean, 4);
  }
  return o;
}

Outcome criterion5() {
  Outcome o;
  const auto a = halving_schedule(100, 12);
  const auto b = halving_schedule(197, 12);
  require(o, a.r_per_layer == std::vector<std::size_t>(12, 8) && a.final_tokens() == 4, "halving(100,12)");
  require(o, b.r_per_layer == std::vector<std::size_t>(12, 16) && b.final_tokens() == 5, "halving(197,12)");
  if (o.pass) o.detail = "r=8 -> 4 remain; r=16 -> 5 remain";
  return o;
}

Outcome criterion6() {
  Outcome o;
  const auto model = clip_like_config();
  const auto base = flops_estimate(model);
  const auto reduced = flops_estimate(model, {{"vision", halving_schedule(197, 12)}});
  const double g0 = base.total / 1e9;
  const double g1 = reduced.total / 1e9;
  require(o, std::abs(g0 - kBaselineGflops) <= kBaselineRelTol * kBaselineGflops, "baseline " + fmt(g0));
  require(o, std::abs(g1 - kReducedGflops) <= kReducedRelTol * kReducedGflops, "reduced " + fmt(g1));
  require(o, reduced.reduction_fraction >= kMinReductionFraction, "fraction " + fmt(reduced.reduction_fraction));
  if (o.pass) {
    o.detail = "baseline " + fmt(g0, 4) + " GFLOPs, reduced " + fmt(g1, 4) + " GFLOPs, fraction " +
               fmt(reduced.reduction_fraction, 3);
  }
  return o;
}

Outcome criterion7() {
  Outcome o;
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0.0, 1.0);
  auto dense = [&](std::size_t r, std::size_t c) {
    std::vector<double> v(r * c);
    for (double& x : v) x = g(rng);
    return DenseMatrix(r, c, std::move(v));
  };
  auto vec = [&](std::size_t n) {
    std::vector<double> v(n);
    for (double& x : v) x = 2.0 * g(rng);
    return v;
  };
  const double ln2 = std::log(2.0);
  double worst_zero = 0.0, worst_sym = 0.0, worst_max = 0.0, worst_rel = 0.0;
  std::size_t fd_failures = 0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t dv = 2 + rng() % 6, dl = 2 + rng() % 6, dp = 2 + rng() % 6;
    const ProjectionPair pp{dense(dv, dp), dense(dl, dp)};
    const ProjectionPair swapped{pp.w_language, pp.w_vision};
    const ProjectionPair same{pp.w_vision, pp.w_vision};
    CrossToken cv{vec(dv), 0, Modality::Vision};
    CrossToken cl{vec(dl), 0, Modality::Language};

    worst_zero = std::max(worst_zero, std::abs(js_divergence_loss(cv, cv, same)));
    const double js = js_divergence_loss(cv, cl, pp);
    worst_sym = std::max(worst_sym, std::abs(js - js_divergence_loss(cl, cv, swapped)));
    worst_max = std::max(worst_max, js);

    const auto grad = js_divergence_gradient(cv, cl, pp);
    auto check = [&](CrossToken& target, const std::vector<double>& analytic) {
      for (std::size_t k = 0; k < analytic.size(); ++k) {
        const double saved = target.vector[k];
        target.vector[k] = saved + kFdStep;
        const double up = js_divergence_loss(cv, cl, pp);
        target.vector[k] = saved - kFdStep;
        const double down = js_divergence_loss(cv, cl, pp);
        target.vector[k] = saved;
        const double numeric = (up - down) / (2.0 * kFdStep);
        const double err = std::abs(analytic[k] - numeric);
        if (err > kFdRelTol * std::abs(numeric) + kFdAbsFloor) ++fd_failures;
        if (std::abs(numeric) > kFdAbsFloor) worst_rel = std::max(worst_rel, err / std::abs(numeric));
      }
    };
    check(cv, grad.vision);
    check(cl, grad.language);
  }
  require(o, worst_zero < kJsZeroTol, "JS(p,p) up to " + fmt(worst_zero));
  require(o, worst_sym < kJsSymmetryTol, "asymmetry up to " + fmt(worst_sym));
  require(o, worst_max <= ln2 + kJsBoundSlack, "JS max " + fmt(worst_max, 12));
  require(o, fd_failures == 0,
          std::to_string(fd_failures) + " gradient coordinates off, worst relative error " + fmt(worst_rel));
  if (o.pass) {
    o.detail = "max |JS(p,p)| " + fmt(worst_zero, 2) + ", max asymmetry " + fmt(worst_sym, 2) +
               ", max FD rel err " + fmt(worst_rel, 2);
  }
  return o;
}

Outcome criterion8() {
  Outcome o;
  const std::vector<std::size_t> sizes{64, 128, 256, 512, 1024};
  const auto result = benchmark_matching(sizes, 64, 7, 8);
  const std::vector<std::size_t> at197{197};
  const double micros = benchmark_matching(at197, 64, 15, 8).rows.front().cgsm_us;
  require(o, result.cgsm_loglog_slope <= kMaxSlope, "slope " + fmt(result.cgsm_loglog_slope, 4));
  require(o, micros < kMaxMicrosAt197, "N=197 took " + fmt(micros) + " us");
  if (o.pass) {
    o.detail = "log-log slope " + fmt(result.cgsm_loglog_slope, 3) + ", N=197 in " + fmt(micros, 4) + " us";
  }
  return o;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome criterion9() {
  Outcome o;
  const auto dir = std::filesystem::temp_directory_path() / ("tokmerge_accept_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  const auto case2 = (dir / "case2.cget").string();
  write_file_bytes(case2, serialize_embedding_file(to_embedding_file(test::case2())));
  const auto tokens = (dir / "tokens.cget").string();
  write_file_bytes(tokens, serialize_embedding_file(to_embedding_file(synthetic_tokens({11, 6, 99}))));
  const auto importance = (dir / "importance.txt").string();
  {
    std::ofstream f(importance);
    for (int i = 0; i < 11; ++i) f << (i * 0.37 - 1.0) << " ";
  }

  const std::vector<std::string> commands = {
      "match --input " + case2 + " --method cgsm --r 2",
      "match --input " + tokens + " --method cgsm --r 4 --seed 3",
      "match --input " + tokens + " --method cgsm-guided --r 4 --importance " + importance + " --ensemble softmax",
      "match --input " + tokens + " --method bipartite --r 4",
      "match --input " + tokens + " --method greedy --r 4",
      "match --input " + tokens + " --method kmeans --r 4 --seed 5",
      "match --input " + tokens + " --method random --r 4 --seed 5",
      "match --input " + tokens + " --method oracle --r 3",
      "match --input " + tokens + " --method cgsm --r 3 --protect 0,1",
      "expect --n 197 --layers 12 --r 16",
      "simulate --n 197 --layers 12 --r 16 --trials 20000 --seed 1 --method cgsm",
      "simulate --n 197 --layers 12 --r 16 --trials 20000 --seed 1 --method bipartite",
      "schedule --n0 100 --layers 12",
      "flops",
  };
  std::size_t k = 0;
  for (const auto& cmd : commands) {
    std::string outputs[2];
    for (int run = 0; run < 2; ++run) {
      const auto file = dir / ("out_" + std::to_string(k) + "_" + std::to_string(run) + ".json");
      const std::string line = std::string(TOKMERGE_CLI_PATH) + " " + cmd + " > " + file.string();
      const int status = std::system(line.c_str());
      require(o, status == 0, "'" + cmd + "' exited with " + std::to_string(status));
      outputs[run] = slurp(file);
    }
    require(o, !outputs[0].empty() && outputs[0] == outputs[1], "'" + cmd + "' output differs between runs");
    ++k;
  }
  std::filesystem::remove_all(dir);
  if (o.pass) o.detail = std::to_string(commands.size()) + " CLI invocations byte-identical across two runs";
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
    double max_seconds;
  };
  const double unlimited = std::numeric_limits<double>::infinity();
  const std::vector<Criterion> criteria = {
      {"worked-case optimality", criterion1, 1.0},
      {"expectation formulas", criterion2, 10.0},
      {"Monte Carlo agreement", criterion3, 30.0},
      {"oracle dominance and disjointness", criterion4, 60.0},
      {"schedule arithmetic", criterion5, unlimited},
      {"FLOPs calibration", criterion6, unlimited},
      {"JS-loss properties", criterion7, unlimited},
      {"complexity", criterion8, unlimited},
      {"CLI determinism", criterion9, unlimited},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    require(o, secs < criteria[i].max_seconds, "runtime limit " + fmt(criteria[i].max_seconds) + " s exceeded");
    std::printf("%s criterion %zu (%s): %s [%.3f s]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].name,
                o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
