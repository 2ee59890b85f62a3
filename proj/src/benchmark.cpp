#include "tokmerge/benchmark.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "tokmerge/analysis.hpp"
#include "tokmerge/baselines.hpp"
#include "tokmerge/error.hpp"
#include "tokmerge/kernels.hpp"
#include "tokmerge/matching.hpp"

namespace tokmerge {
namespace {

template <typename F>
double median_micros(std::size_t repeats, F&& body) {
  std::vector<double> samples;
  samples.reserve(repeats);
  for (std::size_t k = 0; k < repeats; ++k) {
    const auto start = std::chrono::steady_clock::now();
    body();
    const auto stop = std::chrono::steady_clock::now();
    samples.push_back(std::chrono::duration<double, std::micro>(stop - start).count());
  }
  std::sort(samples.begin(), samples.end());
  return samples[samples.size() / 2];
}

}  // namespace

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw Error(ErrorCode::LengthMismatch, "slope needs >= 2 points");
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mx += std::log(x[k]);
    my += std::log(y[k]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double dx = std::log(x[k]) - mx;
    sxy += dx * (std::log(y[k]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

BenchResult benchmark_matching(std::span<const std::size_t> sizes, std::size_t dim, std::size_t repeats,
                               std::uint64_t seed) {
  if (repeats == 0) throw Error(ErrorCode::MalformedInput, "repeats must be positive");
  BenchResult result;
  result.dim = dim;
  result.repeats = repeats;
  result.threads = kernel_threads();
  std::vector<double> xs, ys;
  for (std::size_t n : sizes) {
    if (n < 2) throw Error(ErrorCode::TooFewTokens, "benchmark sizes must be >= 2");
    const auto keys = synthetic_tokens({n, dim, seed + n});
    BenchRow row;
    row.n = n;
    row.r = std::max<std::size_t>(1, n / 4);
    volatile std::size_t sink = 0;
    row.similarity_serial_us = median_micros(repeats, [&] { sink = reference::cosine_similarity_matrix(keys).n(); });
    row.similarity_parallel_us = median_micros(repeats, [&] { sink = cosine_similarity_matrix(keys).n(); });
    row.cgsm_us = median_micros(repeats, [&] {
      sink = complete_graph_match(cosine_similarity_matrix(keys), row.r).pairs.size();
    });
    row.bipartite_us = median_micros(repeats, [&] {
      sink = bipartite_soft_match(cosine_similarity_matrix(keys), row.r).pairs.size();
    });
    (void)sink;
    xs.push_back(static_cast<double>(n));
    ys.push_back(std::max(row.cgsm_us, 1e-3));
    result.rows.push_back(row);
  }
  if (xs.size() >= 2) result.cgsm_loglog_slope = loglog_slope(xs, ys);
  return result;
}

}  // namespace tokmerge
