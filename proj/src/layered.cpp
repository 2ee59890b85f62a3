#include <chrono>
#include <cmath>
#include <numbers>
#include <random>

#include "tokmerge/analysis.hpp"
#include "tokmerge/error.hpp"
#include "tokmerge/guidance.hpp"
#include "tokmerge/rng.hpp"

namespace tokmerge {
namespace {

struct Rotation {
  std::size_t p;
  std::size_t q;
  double c;
  double s;
};

// A fixed orthogonal map per layer: a product of 2d seeded Givens rotations.
std::vector<Rotation> layer_mixing(std::size_t dim, std::uint64_t seed, std::size_t layer) {
  std::vector<Rotation> rotations;
  if (dim < 2) return rotations;
  SplitMix64 rng = SplitMix64::substream(seed, layer);
  for (std::size_t k = 0; k < 2 * dim; ++k) {
    const std::size_t p = rng.below(dim);
    std::size_t q = rng.below(dim - 1);
    q += static_cast<std::size_t>(q >= p);
    const double theta = 2.0 * std::numbers::pi * rng.uniform();
    rotations.push_back({p, q, std::cos(theta), std::sin(theta)});
  }
  return rotations;
}

TokenMatrix apply_mixing(const TokenMatrix& tokens, const std::vector<Rotation>& rotations) {
  std::vector<double> out(tokens.data().begin(), tokens.data().end());
  const std::size_t dim = tokens.dim();
  for (std::size_t i = 0; i < tokens.n_tokens(); ++i) {
    double* row = out.data() + i * dim;
    for (const auto& g : rotations) {
      const double a = row[g.p];
      const double b = row[g.q];
      row[g.p] = g.c * a - g.s * b;
      row[g.q] = g.s * a + g.c * b;
    }
  }
  return TokenMatrix(tokens.n_tokens(), dim, std::move(out));
}

std::vector<double> mean_token(const TokenMatrix& tokens) {
  std::vector<double> mean(tokens.dim(), 0.0);
  for (std::size_t i = 0; i < tokens.n_tokens(); ++i) {
    for (std::size_t c = 0; c < tokens.dim(); ++c) mean[c] += tokens(i, c);
  }
  for (double& v : mean) v /= static_cast<double>(tokens.n_tokens());
  return mean;
}

}  // namespace

TokenMatrix synthetic_tokens(const SyntheticTokens& spec) {
  SplitMix64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> data(spec.n * spec.dim);
  for (double& v : data) v = normal(rng);
  return TokenMatrix(spec.n, spec.dim, std::move(data));
}

ReductionReport layered_reduction_run(const TokenMatrix& initial, Matcher method, const ScheduleConfig& schedule,
                                      const ReductionOptions& opts, std::uint64_t seed, bool record_timing) {
  if (schedule.n0 != initial.n_tokens()) {
    throw Error(ErrorCode::InvalidSchedule, "schedule n0 differs from the initial token count");
  }
  if (schedule.r_per_layer.size() != schedule.layers) {
    throw Error(ErrorCode::InvalidSchedule, "schedule layer count mismatch");
  }

  ReductionReport report;
  report.method = std::string(to_string(method));
  TokenMatrix state = initial;
  std::vector<std::size_t> protect = opts.protected_indices;

  for (std::size_t l = 0; l < schedule.layers; ++l) {
    LayerRecord rec;
    rec.layer = l + 1;
    rec.tokens_in = state.n_tokens();
    const auto mixing = layer_mixing(state.dim(), seed, l);
    std::int64_t micros = 0;

    std::size_t outstanding = schedule.r_per_layer[l];
    while (outstanding > 0) {
      const std::size_t n = state.n_tokens();
      const std::size_t r = effective_r(n > protect.size() ? n - protect.size() : 0, outstanding);
      if (r == 0) break;

      ReductionOptions pass_opts;
      pass_opts.protected_indices = protect;
      if (method == Matcher::CgsmGuided) {
        const auto mean = mean_token(state);
        const auto cross = init_cross_token(CrossTokenInit::Informative, state.dim(),
                                            std::span<const double>(mean), seed, static_cast<int>(l));
        const AttentionProjection identity{DenseMatrix::identity(state.dim()), DenseMatrix::identity(state.dim())};
        pass_opts.importance = cross_importance(cross, identity, state);
        pass_opts.ensemble_mode = opts.ensemble_mode;
      }

      // Keys see the layer's mixing; the carried token state does not.
      const auto start = std::chrono::steady_clock::now();
      const auto keys = apply_mixing(state, mixing);
      const auto d = cosine_similarity_matrix(keys);
      auto result = run_matcher(method, d, &keys, r, pass_opts, mix64(seed ^ (l << 8 | rec.passes)));
      micros += std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - start)
                    .count();

      rec.objective += objective(d, result.plan);
      rec.degenerate_fallbacks += result.plan.degenerate_fallbacks;
      state = ensemble_stacks(state, result.stacks, pass_opts);
      const auto group = result.stacks.group_of();
      for (std::size_t& p : protect) p = group[p];

      rec.r += r;
      ++rec.passes;
      outstanding -= r;
    }

    rec.tokens_out = state.n_tokens();
    if (record_timing) rec.micros = micros;
    report.total_objective += rec.objective;
    report.total_fallbacks += rec.degenerate_fallbacks;
    report.layers.push_back(rec);
  }
  report.final_tokens = state.n_tokens();
  report.final_state = std::move(state);
  return report;
}

}  // namespace tokmerge
