#include <vector>

#include "tokmerge/analysis.hpp"
#include "tokmerge/error.hpp"
#include "tokmerge/rng.hpp"

namespace tokmerge {
namespace {

struct LayerShape {
  std::uint64_t tokens;       // tokens entering the layer
  std::uint64_t sources;      // draws per trial
  std::uint64_t first_dest;   // indices >= first_dest form the destination set
};

// Per layer l (1-based) there are m = N + (1 - l) r tokens. Complete-graph
// matching has r sources and m - r destinations; bipartite has ceil(m/2)
// sources and floor(m/2) destinations. Sources occupy the low indices.
std::vector<LayerShape> layer_shapes(std::int64_t n, std::int64_t layers, std::int64_t r, SimulationMethod method) {
  if (n < 2 || layers < 1 || r < 1 || n - layers * r < 1) {
    throw Error(ErrorCode::InvalidSchedule, "need N >= 2, L >= 1, r >= 1 and N - L*r >= 1");
  }
  std::vector<LayerShape> shapes;
  for (std::int64_t l = 1; l <= layers; ++l) {
    const auto m = static_cast<std::uint64_t>(n + (1 - l) * r);
    const std::uint64_t sources = method == SimulationMethod::CompleteGraph ? static_cast<std::uint64_t>(r) : (m + 1) / 2;
    shapes.push_back({m, sources, sources});
  }
  return shapes;
}

void validate_trials(std::uint64_t trials) {
  if (trials < 1) throw Error(ErrorCode::InvalidSchedule, "need at least one trial");
}

// One trial: every source draws its optimal destination uniformly among the
// other m - 1 tokens; success when the draw lands in the destination set.
inline void run_trial(const std::vector<LayerShape>& shapes, std::uint64_t seed, std::uint64_t trial,
                      std::uint64_t* successes) noexcept {
  SplitMix64 rng = SplitMix64::substream(seed, trial);
  for (std::size_t l = 0; l < shapes.size(); ++l) {
    const auto& s = shapes[l];
    std::uint64_t hits = 0;
    for (std::uint64_t i = 0; i < s.sources; ++i) {
      std::uint64_t j = rng.below(s.tokens - 1);
      j += static_cast<std::uint64_t>(j >= i);
      hits += static_cast<std::uint64_t>(j >= s.first_dest);
    }
    successes[l] += hits;
  }
}

double layer_average(const std::vector<LayerShape>& shapes, const std::vector<std::uint64_t>& successes,
                     std::uint64_t trials) {
  double sum = 0.0;
  for (std::size_t l = 0; l < shapes.size(); ++l) {
    sum += static_cast<double>(successes[l]) / (static_cast<double>(trials) * static_cast<double>(shapes[l].sources));
  }
  return sum / static_cast<double>(shapes.size());
}

}  // namespace

double simulate_optimal_match_rate(std::int64_t n, std::int64_t layers, std::int64_t r, std::uint64_t trials,
                                   std::uint64_t seed, SimulationMethod method) {
  validate_trials(trials);
  const auto shapes = layer_shapes(n, layers, r, method);
  const std::size_t count = shapes.size();
  std::vector<std::uint64_t> successes(count, 0);
  std::uint64_t* acc = successes.data();
  const auto total = static_cast<std::int64_t>(trials);
#pragma omp parallel
  {
    std::vector<std::uint64_t> local(count, 0);
#pragma omp for schedule(static)
    for (std::int64_t t = 0; t < total; ++t) run_trial(shapes, seed, static_cast<std::uint64_t>(t), local.data());
#pragma omp critical
    for (std::size_t l = 0; l < count; ++l) acc[l] += local[l];
  }
  return layer_average(shapes, successes, trials);
}

namespace reference {

double simulate_optimal_match_rate(std::int64_t n, std::int64_t layers, std::int64_t r, std::uint64_t trials,
                                   std::uint64_t seed, SimulationMethod method) {
  validate_trials(trials);
  const auto shapes = layer_shapes(n, layers, r, method);
  std::vector<std::uint64_t> successes(shapes.size(), 0);
  for (std::uint64_t t = 0; t < trials; ++t) run_trial(shapes, seed, t, successes.data());
  return layer_average(shapes, successes, trials);
}

}  // namespace reference
}  // namespace tokmerge
