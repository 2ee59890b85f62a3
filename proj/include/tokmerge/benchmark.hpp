#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace tokmerge {

struct BenchRow {
  std::size_t n = 0;
  std::size_t r = 0;
  double similarity_serial_us = 0.0;
  double similarity_parallel_us = 0.0;
  /// Similarity + priority mask + plan selection, the full complete-graph path.
  double cgsm_us = 0.0;
  double bipartite_us = 0.0;
};

struct BenchResult {
  std::size_t dim = 0;
  std::size_t repeats = 0;
  int threads = 1;
  std::vector<BenchRow> rows;
  /// Least-squares slope of log(cgsm_us) against log(n).
  double cgsm_loglog_slope = 0.0;
};

/// Median wall time over `repeats` runs per size on seeded Gaussian keys,
/// r = max(1, n / 4).
BenchResult benchmark_matching(std::span<const std::size_t> sizes, std::size_t dim, std::size_t repeats,
                               std::uint64_t seed);

double loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace tokmerge
