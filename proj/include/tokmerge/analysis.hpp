#pragma once

// Objective evaluation, closed-form expectations of optimal matching,
// Monte Carlo validation, reduction schedules, FLOPs accounting and a
// multi-layer simulation harness.

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tokmerge/matching.hpp"
#include "tokmerge/numerics.hpp"

namespace tokmerge {

/// Sum of unmasked similarity over the plan's pairs. Throws IndexOutOfRange.
double objective(const SimilarityMatrix& d, const MatchPlan& plan);

/// (1/L) sum_l (N - l r) / (N + (1 - l) r - 1). Requires N - L r >= 1.
double expectation_cgsm(std::int64_t n, std::int64_t layers, std::int64_t r);

/// (1/L) sum_l floor((N + (1 - l) r) / 2) / (N + (1 - l) r - 1).
double expectation_bipartite(std::int64_t n, std::int64_t layers, std::int64_t r);

enum class SimulationMethod { CompleteGraph, Bipartite };

/// Monte Carlo of the uniform-optimal-destination model. Each trial walks
/// all layers; the result is the layer-averaged fraction of source draws
/// that land in the destination set. Trial t uses substream t of `seed`, and
/// counts are integers, so the result is independent of thread count.
double simulate_optimal_match_rate(std::int64_t n, std::int64_t layers, std::int64_t r, std::uint64_t trials,
                                   std::uint64_t seed, SimulationMethod method);

namespace reference {
double simulate_optimal_match_rate(std::int64_t n, std::int64_t layers, std::int64_t r, std::uint64_t trials,
                                   std::uint64_t seed, SimulationMethod method);
}  // namespace reference

/// min(r, floor(n_remaining / 2)).
std::size_t effective_r(std::size_t n_remaining, std::size_t r);

struct ScheduleConfig {
  std::size_t n0 = 0;
  std::size_t layers = 0;
  std::vector<std::size_t> r_per_layer;

  /// Token count after every layer; front() is after layer 1.
  std::vector<std::size_t> remaining_after_each_layer() const;
  std::size_t final_tokens() const;
  /// Every layer leaves at least one token. Throws InvalidSchedule.
  void validate() const;

  bool operator==(const ScheduleConfig&) const = default;
};

/// r = floor(n0 / L) per layer, clamped only so that one token survives.
ScheduleConfig halving_schedule(std::size_t n0, std::size_t layers);

struct BranchConfig {
  std::string name;
  std::size_t layers = 0;
  std::size_t width = 0;
  std::size_t tokens = 0;
  double mlp_ratio = 4.0;
  bool reduced = false;
};

struct ModelConfig {
  std::vector<BranchConfig> branches;
  /// FLOPs charged per multiply-accumulate. 1 matches the profiler
  /// convention behind commonly reported GFLOPs; 2 counts mul and add.
  double flops_per_mac = 1.0;
};

/// Two-tower CLIP-style model: ViT-B/16 vision (197 tokens) and a 12-layer
/// 512-wide text encoder (77 tokens).
ModelConfig clip_like_config();

struct LayerFlops {
  std::string branch;
  std::size_t layer = 0;
  double attention_flops = 0.0;
  double mlp_flops = 0.0;
  std::size_t tokens_at_attention = 0;
  std::size_t tokens_at_mlp = 0;
};

struct FlopsReport {
  std::vector<LayerFlops> per_layer;
  double total = 0.0;
  double baseline_total = 0.0;
  double reduction_fraction = 0.0;
};

/// Schedules are keyed by branch name; reduced branches without an entry
/// keep their token count constant. Reduction sits between attention and
/// MLP within each layer.
FlopsReport flops_estimate(const ModelConfig& model, const std::map<std::string, ScheduleConfig>& schedules = {});

enum class Matcher { Cgsm, CgsmGuided, Bipartite, Greedy, Kmeans, Random, Oracle };

std::string_view to_string(Matcher m) noexcept;
/// Parses the CLI spelling ("cgsm", "cgsm-guided", ...). Throws MalformedInput.
Matcher parse_matcher(std::string_view name);

struct MatcherResult {
  MatchPlan plan;
  StackSet stacks;
};

/// Dispatches to any matcher. Protected indices are honoured by every
/// method (baselines run on the unprotected sub-problem). k-means stacks are
/// expressed as a star plan: each member points at its stack's smallest
/// index. `keys` is required for k-means only.
MatcherResult run_matcher(Matcher m, const SimilarityMatrix& d, const TokenMatrix* keys, std::size_t r,
                          const ReductionOptions& opts, std::uint64_t seed, std::size_t kmeans_iterations = 10);

struct LayerRecord {
  std::size_t layer = 0;
  std::size_t tokens_in = 0;
  std::size_t r = 0;
  /// Matching passes used; a layer removing more than half its tokens
  /// needs several, each bounded by effective_r.
  std::size_t passes = 0;
  std::size_t tokens_out = 0;
  double objective = 0.0;
  std::size_t degenerate_fallbacks = 0;
  /// Matcher wall time; -1 unless timing was requested.
  std::int64_t micros = -1;
};

struct ReductionReport {
  std::string method;
  std::vector<LayerRecord> layers;
  double total_objective = 0.0;
  std::size_t total_fallbacks = 0;
  std::size_t final_tokens = 0;
  TokenMatrix final_state;
};

struct SyntheticTokens {
  std::size_t n = 0;
  std::size_t dim = 0;
  std::uint64_t seed = 0;
};

/// Seeded Gaussian tokens, rows independent N(0, 1).
TokenMatrix synthetic_tokens(const SyntheticTokens& spec);

/// Applies a seeded orthogonal mixing map per layer, recomputes keys and
/// reduces with the chosen matcher. For CgsmGuided, importance comes from a
/// cross token initialised from the mean token. Protected indices are
/// tracked through the merges.
ReductionReport layered_reduction_run(const TokenMatrix& initial, Matcher method, const ScheduleConfig& schedule,
                                      const ReductionOptions& opts, std::uint64_t seed, bool record_timing = false);

}  // namespace tokmerge
