#pragma once

// Complete-graph soft matching and its cross-guided variant.
//
// Pipeline: similarity -> priority ranks + dependency mask -> r sources and
// their destinations -> connected components ("stacks") -> one ensembled
// token per stack.

#include <cstddef>
#include <optional>
#include <vector>

#include "tokmerge/numerics.hpp"

namespace tokmerge {

/// Similarity matrix plus the priority ranks that define the dependency
/// mask. The mask is evaluated in original index space: entry (i, j) is
/// -inf iff row_rank[i] >= col_rank[j] (which covers i == j).
struct PriorityMaskedSimilarity {
  SimilarityMatrix base;
  std::vector<std::size_t> row_rank;
  std::vector<std::size_t> col_rank;

  std::size_t n() const noexcept { return base.n(); }

  double masked(std::size_t i, std::size_t j) const noexcept {
    return (i == j || row_rank[i] >= col_rank[j]) ? kNegInf : base.at(i, j);
  }
};

struct TokenPair {
  std::size_t source = 0;
  std::size_t destination = 0;

  bool operator==(const TokenPair&) const = default;
};

struct MatchPlan {
  std::vector<TokenPair> pairs;
  std::size_t n = 0;
  /// Sources whose masked row was empty over the candidates, so their
  /// destination came from the unmasked similarity instead.
  std::size_t degenerate_fallbacks = 0;

  std::size_t r() const noexcept { return pairs.size(); }

  /// Distinct sources, sources and destinations disjoint, indices < n,
  /// no self pairs. Throws MalformedInput / IndexOutOfRange.
  void validate() const;

  bool operator==(const MatchPlan&) const = default;
};

/// Partition of [0, n) into groups ordered by their smallest member. Output
/// token k of an ensemble is group k.
struct StackSet {
  std::size_t n = 0;
  std::vector<std::vector<std::size_t>> groups;

  /// group_of()[t] is the group holding token t.
  std::vector<std::size_t> group_of() const;

  bool operator==(const StackSet&) const = default;
};

enum class EnsembleMode { Average, ImportanceSoftmax };

struct ReductionOptions {
  std::optional<std::vector<double>> importance;
  EnsembleMode ensemble_mode = EnsembleMode::Average;
  /// Never a source nor a destination (cross / class tokens).
  std::vector<std::size_t> protected_indices;
};

PriorityMaskedSimilarity priority_mask(const SimilarityMatrix& d);

/// Largest r accepted by select_match_plan for n tokens with `protected_count`
/// of them protected.
std::size_t max_reduction(std::size_t n, std::size_t protected_count) noexcept;

/// Picks r sources by masked row maximum (minus importance when present)
/// and gives each its best non-source destination.
MatchPlan select_match_plan(const PriorityMaskedSimilarity& pm, std::size_t r, const ReductionOptions& opts);

/// Union-find over the plan's pairs; singletons for untouched tokens.
StackSet build_stacks(const MatchPlan& plan);

TokenMatrix ensemble_stacks(const TokenMatrix& tokens, const StackSet& stacks, const ReductionOptions& opts);

struct ReductionResult {
  TokenMatrix tokens;
  MatchPlan plan;
  /// Sum of unmasked similarity over the plan pairs.
  double objective = 0.0;
};

ReductionResult reduce_tokens(const TokenMatrix& tokens, const TokenMatrix& keys, std::size_t r,
                              const ReductionOptions& opts);
ReductionResult reduce_tokens(const TokenMatrix& tokens, const SimilarityMatrix& d, std::size_t r,
                              const ReductionOptions& opts);

/// Plan-only convenience: priority_mask + select_match_plan.
MatchPlan complete_graph_match(const SimilarityMatrix& d, std::size_t r, const ReductionOptions& opts = {});

}  // namespace tokmerge
