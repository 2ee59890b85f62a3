#include "tokmerge/matching.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "tokmerge/error.hpp"
#include "tokmerge/kernels.hpp"

namespace tokmerge {
namespace {

std::vector<bool> protected_mask(std::size_t n, const std::vector<std::size_t>& protected_indices) {
  std::vector<bool> mask(n, false);
  for (std::size_t p : protected_indices) {
    if (p >= n) throw Error(ErrorCode::IndexOutOfRange, "protected index " + std::to_string(p) + " >= n");
    mask[p] = true;
  }
  return mask;
}

std::size_t count_true(const std::vector<bool>& v) {
  return static_cast<std::size_t>(std::count(v.begin(), v.end(), true));
}

void check_importance(const ReductionOptions& opts, std::size_t n) {
  if (opts.ensemble_mode == EnsembleMode::ImportanceSoftmax && !opts.importance) {
    throw Error(ErrorCode::MissingImportance, "ImportanceSoftmax ensemble needs importance scores");
  }
  if (opts.importance && opts.importance->size() != n) {
    throw Error(ErrorCode::DimensionMismatch, "importance has " + std::to_string(opts.importance->size()) +
                                                  " entries for " + std::to_string(n) + " tokens");
  }
  if (opts.importance) {
    for (double v : *opts.importance) {
      if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "importance contains NaN/Inf");
    }
  }
}

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), std::size_t{0}); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  // Smaller root wins, so every root is its component's minimum.
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
  }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace

void MatchPlan::validate() const {
  std::vector<bool> is_source(n, false);
  for (const auto& p : pairs) {
    if (p.source >= n || p.destination >= n) throw Error(ErrorCode::IndexOutOfRange, "pair index >= n");
    if (p.source == p.destination) throw Error(ErrorCode::MalformedInput, "self pair");
    if (is_source[p.source]) throw Error(ErrorCode::MalformedInput, "duplicate source");
    is_source[p.source] = true;
  }
  for (const auto& p : pairs) {
    if (is_source[p.destination]) throw Error(ErrorCode::MalformedInput, "destination is also a source");
  }
}

std::vector<std::size_t> StackSet::group_of() const {
  std::vector<std::size_t> g(n, 0);
  for (std::size_t k = 0; k < groups.size(); ++k) {
    for (std::size_t t : groups[k]) g[t] = k;
  }
  return g;
}

PriorityMaskedSimilarity priority_mask(const SimilarityMatrix& d) {
  if (d.n() < 2) throw Error(ErrorCode::TooFewTokens, "priority mask needs n >= 2");
  const auto maxima = similarity_maxima(d);
  PriorityMaskedSimilarity pm{d, stable_argsort_desc(maxima.row_max).ranks(),
                              stable_argsort_desc(maxima.col_max).ranks()};
  return pm;
}

std::size_t max_reduction(std::size_t n, std::size_t protected_count) noexcept {
  return protected_count >= n ? 0 : (n - protected_count) / 2;
}

MatchPlan select_match_plan(const PriorityMaskedSimilarity& pm, std::size_t r, const ReductionOptions& opts) {
  const std::size_t n = pm.n();
  const auto is_protected = protected_mask(n, opts.protected_indices);
  check_importance(opts, n);
  const std::size_t bound = max_reduction(n, count_true(is_protected));
  if (r > bound) {
    throw Error(ErrorCode::ReductionTooLarge,
                "r=" + std::to_string(r) + " exceeds floor((n - protected)/2)=" + std::to_string(bound));
  }

  MatchPlan plan;
  plan.n = n;
  if (r == 0) return plan;

  // Selection score: masked row maximum over matchable columns, minus
  // cross-modal importance when guidance is supplied.
  std::vector<double> score(n, kNegInf);
  const auto rows = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static) if (n >= kParallelRowThreshold)
  for (std::ptrdiff_t si = 0; si < rows; ++si) {
    const auto i = static_cast<std::size_t>(si);
    if (is_protected[i]) continue;
    double best = kNegInf;
    for (std::size_t j = 0; j < n; ++j) {
      if (!is_protected[j]) best = std::max(best, pm.masked(i, j));
    }
    score[i] = opts.importance ? best - (*opts.importance)[i] : best;
  }

  std::vector<std::size_t> candidates;
  candidates.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!is_protected[i]) candidates.push_back(i);
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
  candidates.resize(r);

  std::vector<bool> excluded = is_protected;
  for (std::size_t s : candidates) excluded[s] = true;

  std::vector<std::size_t> destination(r, 0);
  std::vector<char> fell_back(r, 0);
  const auto sources = static_cast<std::ptrdiff_t>(r);
#pragma omp parallel for schedule(static) if (n >= kParallelRowThreshold)
  for (std::ptrdiff_t sk = 0; sk < sources; ++sk) {
    const auto k = static_cast<std::size_t>(sk);
    const std::size_t i = candidates[k];
    std::size_t best_j = n;
    double best = kNegInf;
    for (std::size_t j = 0; j < n; ++j) {
      if (excluded[j]) continue;
      const double v = pm.masked(i, j);
      if (best_j == n || v > best) {
        best = v;
        best_j = j;
      }
    }
    if (best == kNegInf) {
      fell_back[k] = 1;
      best_j = n;
      for (std::size_t j = 0; j < n; ++j) {
        if (excluded[j]) continue;
        const double v = pm.base.at(i, j);
        if (best_j == n || v > best) {
          best = v;
          best_j = j;
        }
      }
    }
    destination[k] = best_j;
  }

  plan.pairs.reserve(r);
  for (std::size_t k = 0; k < r; ++k) {
    plan.pairs.push_back({candidates[k], destination[k]});
    plan.degenerate_fallbacks += static_cast<std::size_t>(fell_back[k]);
  }
  return plan;
}

StackSet build_stacks(const MatchPlan& plan) {
  plan.validate();
  DisjointSets sets(plan.n);
  for (const auto& p : plan.pairs) sets.unite(p.source, p.destination);

  StackSet stacks;
  stacks.n = plan.n;
  std::vector<std::size_t> slot(plan.n, plan.n);
  for (std::size_t t = 0; t < plan.n; ++t) {
    const std::size_t root = sets.find(t);
    if (slot[root] == plan.n) {
      slot[root] = stacks.groups.size();
      stacks.groups.emplace_back();
    }
    stacks.groups[slot[root]].push_back(t);
  }
  return stacks;
}

TokenMatrix ensemble_stacks(const TokenMatrix& tokens, const StackSet& stacks, const ReductionOptions& opts) {
  const std::size_t n = tokens.n_tokens();
  const std::size_t dim = tokens.dim();
  if (stacks.n != n) throw Error(ErrorCode::DimensionMismatch, "stack set size differs from token count");
  check_importance(opts, n);

  std::vector<double> out(stacks.groups.size() * dim, 0.0);
  const auto groups = static_cast<std::ptrdiff_t>(stacks.groups.size());
#pragma omp parallel for schedule(static) if (stacks.groups.size() >= kParallelRowThreshold)
  for (std::ptrdiff_t sg = 0; sg < groups; ++sg) {
    const auto g = static_cast<std::size_t>(sg);
    const auto& members = stacks.groups[g];
    std::vector<double> weights;
    if (opts.ensemble_mode == EnsembleMode::ImportanceSoftmax) {
      std::vector<double> local;
      local.reserve(members.size());
      for (std::size_t t : members) local.push_back((*opts.importance)[t]);
      weights = softmax(local);
    } else {
      weights.assign(members.size(), 1.0 / static_cast<double>(members.size()));
    }
    double* dst = out.data() + g * dim;
    for (std::size_t m = 0; m < members.size(); ++m) {
      const auto row = tokens.row(members[m]);
      for (std::size_t c = 0; c < dim; ++c) dst[c] += weights[m] * row[c];
    }
  }
  return TokenMatrix(stacks.groups.size(), dim, std::move(out));
}

MatchPlan complete_graph_match(const SimilarityMatrix& d, std::size_t r, const ReductionOptions& opts) {
  return select_match_plan(priority_mask(d), r, opts);
}

ReductionResult reduce_tokens(const TokenMatrix& tokens, const SimilarityMatrix& d, std::size_t r,
                              const ReductionOptions& opts) {
  if (tokens.n_tokens() != d.n()) {
    throw Error(ErrorCode::DimensionMismatch, "token count differs from similarity matrix size");
  }
  auto plan = complete_graph_match(d, r, opts);
  double objective = 0.0;
  for (const auto& p : plan.pairs) objective += d.raw(p.source, p.destination);
  auto merged = ensemble_stacks(tokens, build_stacks(plan), opts);
  return {std::move(merged), std::move(plan), objective};
}

ReductionResult reduce_tokens(const TokenMatrix& tokens, const TokenMatrix& keys, std::size_t r,
                              const ReductionOptions& opts) {
  if (tokens.n_tokens() != keys.n_tokens()) {
    throw Error(ErrorCode::DimensionMismatch, "token count differs from key count");
  }
  return reduce_tokens(tokens, cosine_similarity_matrix(keys), r, opts);
}

}  // namespace tokmerge
