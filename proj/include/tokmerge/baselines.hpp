#pragma once

// Reference matchers used for comparison and verification.

#include <cstddef>
#include <cstdint>

#include "tokmerge/matching.hpp"
#include "tokmerge/numerics.hpp"

namespace tokmerge {

/// Even indices form the source side, odd indices the destination side.
MatchPlan bipartite_soft_match(const SimilarityMatrix& d, std::size_t r);

/// r rounds of "take the globally best feasible pair".
MatchPlan greedy_match(const SimilarityMatrix& d, std::size_t r);

/// Lloyd iterations on unit-normalized keys into n - r clusters.
StackSet kmeans_match(const TokenMatrix& keys, std::size_t r, std::size_t iterations, std::uint64_t seed);

MatchPlan random_match(std::size_t n, std::size_t r, std::uint64_t seed);

struct OptimalMatch {
  MatchPlan plan;
  double s_star = 0.0;
};

inline constexpr std::size_t kExhaustiveMaxTokens = 12;
inline constexpr std::size_t kExhaustiveMaxReduction = 4;

/// Brute-force maximizer of the pair-sum objective over all feasible plans.
/// Throws InstanceTooLarge beyond 12 tokens or r > 4.
OptimalMatch exhaustive_optimal(const SimilarityMatrix& d, std::size_t r);

}  // namespace tokmerge
