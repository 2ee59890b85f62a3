#include "tokmerge/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "tokmerge/error.hpp"
#include "tokmerge/rng.hpp"

namespace tokmerge {
namespace {

void require_r(std::size_t n, std::size_t r) {
  if (r > n / 2) {
    throw Error(ErrorCode::ReductionTooLarge,
                "r=" + std::to_string(r) + " exceeds floor(n/2)=" + std::to_string(n / 2));
  }
}

}  // namespace

MatchPlan bipartite_soft_match(const SimilarityMatrix& d, std::size_t r) {
  const std::size_t n = d.n();
  require_r(n, r);
  MatchPlan plan;
  plan.n = n;
  if (r == 0) return plan;

  std::vector<std::size_t> side_a;
  std::vector<double> best;
  std::vector<std::size_t> best_b;
  for (std::size_t a = 0; a < n; a += 2) {
    double value = kNegInf;
    std::size_t arg = n;
    for (std::size_t b = 1; b < n; b += 2) {
      if (arg == n || d.at(a, b) > value) {
        value = d.at(a, b);
        arg = b;
      }
    }
    side_a.push_back(a);
    best.push_back(value);
    best_b.push_back(arg);
  }
  const auto order = stable_argsort_desc(best);
  for (std::size_t k = 0; k < r; ++k) plan.pairs.push_back({side_a[order[k]], best_b[order[k]]});
  return plan;
}

MatchPlan greedy_match(const SimilarityMatrix& d, std::size_t r) {
  const std::size_t n = d.n();
  require_r(n, r);
  MatchPlan plan;
  plan.n = n;
  std::vector<bool> is_source(n, false);
  std::vector<bool> is_destination(n, false);
  for (std::size_t step = 0; step < r; ++step) {
    double value = kNegInf;
    std::size_t bi = n;
    std::size_t bj = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (is_source[i] || is_destination[i]) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i || is_source[j]) continue;
        if (bi == n || d.at(i, j) > value) {
          value = d.at(i, j);
          bi = i;
          bj = j;
        }
      }
    }
    plan.pairs.push_back({bi, bj});
    is_source[bi] = true;
    is_destination[bj] = true;
  }
  return plan;
}

StackSet kmeans_match(const TokenMatrix& keys, std::size_t r, std::size_t iterations, std::uint64_t seed) {
  const std::size_t n = keys.n_tokens();
  const std::size_t dim = keys.dim();
  if (r >= n && n > 0) {
    throw Error(ErrorCode::ReductionTooLarge, "k-means needs r <= n - 1");
  }
  if (iterations == 0) throw Error(ErrorCode::MalformedInput, "k-means needs at least one iteration");
  const std::size_t k = n - r;

  std::vector<double> unit(n * dim);
  for (std::size_t i = 0; i < n; ++i) {
    const double norm = std::max(l2_norm(keys.row(i)), kNormEpsilon);
    for (std::size_t c = 0; c < dim; ++c) unit[i * dim + c] = keys(i, c) / norm;
  }
  auto point = [&](std::size_t i) { return std::span<const double>(unit.data() + i * dim, dim); };

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  SplitMix64 rng(seed);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

  std::vector<double> centroids(k * dim);
  for (std::size_t c = 0; c < k; ++c) {
    std::copy_n(unit.begin() + static_cast<std::ptrdiff_t>(order[c] * dim), dim,
                centroids.begin() + static_cast<std::ptrdiff_t>(c * dim));
  }
  auto centroid = [&](std::size_t c) { return std::span<const double>(centroids.data() + c * dim, dim); };

  std::vector<std::size_t> assign(n, 0);
  std::vector<double> affinity(n, 0.0);
  std::vector<std::size_t> sizes(k, 0);

  auto assign_points = [&] {
    bool changed = false;
    std::fill(sizes.begin(), sizes.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best_c = 0;
      double best = kNegInf;
      for (std::size_t c = 0; c < k; ++c) {
        const double s = cosine(point(i), centroid(c));
        if (s > best) {
          best = s;
          best_c = c;
        }
      }
      changed |= assign[i] != best_c;
      assign[i] = best_c;
      affinity[i] = best;
      ++sizes[best_c];
    }
    return changed;
  };

  // Every empty cluster takes the point farthest from its centroid among
  // clusters that can spare one.
  auto reseed_empty = [&] {
    for (std::size_t c = 0; c < k; ++c) {
      if (sizes[c] != 0) continue;
      std::size_t far = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (sizes[assign[i]] < 2) continue;
        if (far == n || affinity[i] < affinity[far]) far = i;
      }
      --sizes[assign[far]];
      assign[far] = c;
      affinity[far] = 1.0;
      sizes[c] = 1;
      std::copy_n(unit.begin() + static_cast<std::ptrdiff_t>(far * dim), dim,
                  centroids.begin() + static_cast<std::ptrdiff_t>(c * dim));
    }
  };

  auto update_centroids = [&] {
    std::fill(centroids.begin(), centroids.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < dim; ++c) centroids[assign[i] * dim + c] += unit[i * dim + c];
    }
    for (std::size_t c = 0; c < k; ++c) {
      for (std::size_t e = 0; e < dim; ++e) centroids[c * dim + e] /= static_cast<double>(sizes[c]);
    }
  };

  for (std::size_t it = 0; it < iterations; ++it) {
    const bool changed = assign_points();
    reseed_empty();
    if (!changed && it > 0) break;
    update_centroids();
  }
  assign_points();
  reseed_empty();

  StackSet stacks;
  stacks.n = n;
  std::vector<std::size_t> slot(k, k);
  for (std::size_t i = 0; i < n; ++i) {
    if (slot[assign[i]] == k) {
      slot[assign[i]] = stacks.groups.size();
      stacks.groups.emplace_back();
    }
    stacks.groups[slot[assign[i]]].push_back(i);
  }
  return stacks;
}

MatchPlan random_match(std::size_t n, std::size_t r, std::uint64_t seed) {
  require_r(n, r);
  MatchPlan plan;
  plan.n = n;
  SplitMix64 rng(seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Partial Fisher-Yates: the first r slots become the sources.
  for (std::size_t i = 0; i < r; ++i) std::swap(order[i], order[i + rng.below(n - i)]);
  const std::size_t pool = n - r;
  for (std::size_t i = 0; i < r; ++i) plan.pairs.push_back({order[i], order[r + rng.below(pool)]});
  return plan;
}

OptimalMatch exhaustive_optimal(const SimilarityMatrix& d, std::size_t r) {
  const std::size_t n = d.n();
  if (n > kExhaustiveMaxTokens || r > kExhaustiveMaxReduction) {
    throw Error(ErrorCode::InstanceTooLarge, "exhaustive search limited to n <= 12 and r <= 4");
  }
  require_r(n, r);

  OptimalMatch best;
  best.plan.n = n;
  best.s_star = kNegInf;
  if (r == 0) {
    best.s_star = 0.0;
    return best;
  }

  std::vector<std::size_t> sources;
  std::vector<bool> is_source(n, false);
  std::vector<std::size_t> dest(r, 0);

  // Assign a destination to every source (odometer over the non-sources).
  auto score_all_destinations = [&] {
    std::vector<std::size_t> pool;
    for (std::size_t j = 0; j < n; ++j) {
      if (!is_source[j]) pool.push_back(j);
    }
    std::vector<std::size_t> digit(r, 0);
    while (true) {
      double s = 0.0;
      for (std::size_t k = 0; k < r; ++k) s += d.at(sources[k], pool[digit[k]]);
      if (s > best.s_star) {
        best.s_star = s;
        best.plan.pairs.clear();
        for (std::size_t k = 0; k < r; ++k) best.plan.pairs.push_back({sources[k], pool[digit[k]]});
      }
      std::size_t pos = 0;
      while (pos < r && ++digit[pos] == pool.size()) digit[pos++] = 0;
      if (pos == r) break;
    }
  };

  auto choose = [&](auto&& self, std::size_t start) -> void {
    if (sources.size() == r) {
      score_all_destinations();
      return;
    }
    for (std::size_t i = start; i < n; ++i) {
      sources.push_back(i);
      is_source[i] = true;
      self(self, i + 1);
      is_source[i] = false;
      sources.pop_back();
    }
  };
  choose(choose, 0);
  return best;
}

}  // namespace tokmerge
