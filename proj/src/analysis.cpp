#include "tokmerge/analysis.hpp"

#include <algorithm>
#include <string>

#include "tokmerge/baselines.hpp"
#include "tokmerge/error.hpp"

namespace tokmerge {
namespace {

void require_schedule(std::int64_t n, std::int64_t layers, std::int64_t r) {
  if (n < 2 || layers < 1 || r < 1 || n - layers * r < 1) {
    throw Error(ErrorCode::InvalidSchedule, "need N >= 2, L >= 1, r >= 1 and N - L*r >= 1 (N=" + std::to_string(n) +
                                                ", L=" + std::to_string(layers) + ", r=" + std::to_string(r) + ")");
  }
}

struct SubProblem {
  SimilarityMatrix d;
  std::vector<std::size_t> to_original;
};

SubProblem unprotected_subproblem(const SimilarityMatrix& d, const std::vector<std::size_t>& protected_indices) {
  std::vector<bool> skip(d.n(), false);
  for (std::size_t p : protected_indices) {
    if (p >= d.n()) throw Error(ErrorCode::IndexOutOfRange, "protected index " + std::to_string(p) + " >= n");
    skip[p] = true;
  }
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < d.n(); ++i) {
    if (!skip[i]) keep.push_back(i);
  }
  if (keep.empty()) throw Error(ErrorCode::TooFewTokens, "every token is protected");
  std::vector<double> entries;
  entries.reserve(keep.size() * keep.size());
  for (std::size_t i : keep) {
    for (std::size_t j : keep) entries.push_back(d.raw(i, j));
  }
  return {SimilarityMatrix(keep.size(), std::move(entries), d.diagonal_excluded()), std::move(keep)};
}

MatchPlan lift(const MatchPlan& sub, const std::vector<std::size_t>& to_original, std::size_t n) {
  MatchPlan plan;
  plan.n = n;
  plan.degenerate_fallbacks = sub.degenerate_fallbacks;
  for (const auto& p : sub.pairs) plan.pairs.push_back({to_original[p.source], to_original[p.destination]});
  return plan;
}

MatchPlan star_plan(const StackSet& stacks) {
  MatchPlan plan;
  plan.n = stacks.n;
  for (const auto& g : stacks.groups) {
    for (std::size_t k = 1; k < g.size(); ++k) plan.pairs.push_back({g[k], g.front()});
  }
  return plan;
}

}  // namespace

double objective(const SimilarityMatrix& d, const MatchPlan& plan) {
  double s = 0.0;
  for (const auto& p : plan.pairs) {
    if (p.source >= d.n() || p.destination >= d.n()) {
      throw Error(ErrorCode::IndexOutOfRange, "plan refers to token outside the similarity matrix");
    }
    s += d.raw(p.source, p.destination);
  }
  return s;
}

double expectation_cgsm(std::int64_t n, std::int64_t layers, std::int64_t r) {
  require_schedule(n, layers, r);
  double sum = 0.0;
  for (std::int64_t l = 1; l <= layers; ++l) {
    sum += static_cast<double>(n - l * r) / static_cast<double>(n + (1 - l) * r - 1);
  }
  return sum / static_cast<double>(layers);
}

double expectation_bipartite(std::int64_t n, std::int64_t layers, std::int64_t r) {
  require_schedule(n, layers, r);
  double sum = 0.0;
  for (std::int64_t l = 1; l <= layers; ++l) {
    const std::int64_t m = n + (1 - l) * r;
    sum += static_cast<double>(m / 2) / static_cast<double>(m - 1);
  }
  return sum / static_cast<double>(layers);
}

std::size_t effective_r(std::size_t n_remaining, std::size_t r) { return std::min(r, n_remaining / 2); }

std::vector<std::size_t> ScheduleConfig::remaining_after_each_layer() const {
  std::vector<std::size_t> out;
  out.reserve(r_per_layer.size());
  std::size_t n = n0;
  for (std::size_t r : r_per_layer) {
    n = r > n ? 0 : n - r;
    out.push_back(n);
  }
  return out;
}

std::size_t ScheduleConfig::final_tokens() const {
  const auto rem = remaining_after_each_layer();
  return rem.empty() ? n0 : rem.back();
}

void ScheduleConfig::validate() const {
  if (n0 < 1) throw Error(ErrorCode::InvalidSchedule, "schedule needs n0 >= 1");
  if (r_per_layer.size() != layers) {
    throw Error(ErrorCode::InvalidSchedule, "schedule lists " + std::to_string(r_per_layer.size()) +
                                                " reductions for " + std::to_string(layers) + " layers");
  }
  std::size_t n = n0;
  for (std::size_t l = 0; l < layers; ++l) {
    if (r_per_layer[l] >= n) {
      throw Error(ErrorCode::InvalidSchedule, "layer " + std::to_string(l + 1) + " removes " +
                                                  std::to_string(r_per_layer[l]) + " of " + std::to_string(n) +
                                                  " tokens; at least one must remain");
    }
    n -= r_per_layer[l];
  }
}

ScheduleConfig halving_schedule(std::size_t n0, std::size_t layers) {
  if (layers == 0 || n0 <= layers) {
    throw Error(ErrorCode::InvalidSchedule, "halving schedule needs n0 > L >= 1");
  }
  ScheduleConfig s{n0, layers, {}};
  const std::size_t per_layer = n0 / layers;
  std::size_t n = n0;
  for (std::size_t l = 0; l < layers; ++l) {
    // A layer may remove more than half of its tokens; the layered runner
    // splits such a layer into several matching passes.
    const std::size_t r = std::min(per_layer, n - 1);
    s.r_per_layer.push_back(r);
    n -= r;
  }
  return s;
}

std::string_view to_string(Matcher m) noexcept {
  switch (m) {
    case Matcher::Cgsm: return "cgsm";
    case Matcher::CgsmGuided: return "cgsm-guided";
    case Matcher::Bipartite: return "bipartite";
    case Matcher::Greedy: return "greedy";
    case Matcher::Kmeans: return "kmeans";
    case Matcher::Random: return "random";
    case Matcher::Oracle: return "oracle";
  }
  return "unknown";
}

Matcher parse_matcher(std::string_view name) {
  for (Matcher m : {Matcher::Cgsm, Matcher::CgsmGuided, Matcher::Bipartite, Matcher::Greedy, Matcher::Kmeans,
                    Matcher::Random, Matcher::Oracle}) {
    if (to_string(m) == name) return m;
  }
  throw Error(ErrorCode::MalformedInput, "unknown matcher '" + std::string(name) + "'");
}

MatcherResult run_matcher(Matcher m, const SimilarityMatrix& d, const TokenMatrix* keys, std::size_t r,
                          const ReductionOptions& opts, std::uint64_t seed, std::size_t kmeans_iterations) {
  const std::size_t n = d.n();
  MatchPlan plan;
  switch (m) {
    case Matcher::Cgsm: {
      ReductionOptions plain = opts;
      plain.importance.reset();
      plain.ensemble_mode = EnsembleMode::Average;
      plan = complete_graph_match(d, r, plain);
      break;
    }
    case Matcher::CgsmGuided:
      if (!opts.importance) throw Error(ErrorCode::MissingImportance, "cgsm-guided needs importance scores");
      plan = complete_graph_match(d, r, opts);
      break;
    case Matcher::Kmeans: {
      if (keys == nullptr) throw Error(ErrorCode::MalformedInput, "k-means needs token keys, not a similarity matrix");
      if (keys->n_tokens() != n) throw Error(ErrorCode::DimensionMismatch, "key count differs from n");
      auto sub = unprotected_subproblem(d, opts.protected_indices);
      std::vector<double> rows;
      for (std::size_t i : sub.to_original) {
        const auto row = keys->row(i);
        rows.insert(rows.end(), row.begin(), row.end());
      }
      const TokenMatrix sub_keys(sub.to_original.size(), keys->dim(), std::move(rows));
      const auto sub_plan = star_plan(kmeans_match(sub_keys, r, kmeans_iterations, seed));
      plan = lift(sub_plan, sub.to_original, n);
      break;
    }
    case Matcher::Bipartite:
    case Matcher::Greedy:
    case Matcher::Random:
    case Matcher::Oracle: {
      auto sub = unprotected_subproblem(d, opts.protected_indices);
      MatchPlan sub_plan;
      if (m == Matcher::Bipartite) sub_plan = bipartite_soft_match(sub.d, r);
      if (m == Matcher::Greedy) sub_plan = greedy_match(sub.d, r);
      if (m == Matcher::Random) sub_plan = random_match(sub.d.n(), r, seed);
      if (m == Matcher::Oracle) sub_plan = exhaustive_optimal(sub.d, r).plan;
      plan = lift(sub_plan, sub.to_original, n);
      break;
    }
  }
  auto stacks = build_stacks(plan);
  return {std::move(plan), std::move(stacks)};
}

}  // namespace tokmerge
