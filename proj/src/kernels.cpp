#include "tokmerge/kernels.hpp"

#include <algorithm>
#include <omp.h>

#include "tokmerge/error.hpp"

namespace tokmerge {
namespace {

constexpr std::size_t kColumnBlock = 64;

void require_keys(const TokenMatrix& keys) {
  if (keys.n_tokens() < 2) throw Error(ErrorCode::TooFewTokens, "need at least two keys");
}

// Entry (i, j) depends only on rows i and j, so serial and parallel paths
// produce identical bits.
inline double cosine_entry(const TokenMatrix& keys, const std::vector<double>& norms, std::size_t i,
                           std::size_t j) noexcept {
  return dot(keys.row(i), keys.row(j)) / (norms[i] * norms[j]);
}

std::vector<double> clamped_norms(const TokenMatrix& keys) {
  std::vector<double> norms(keys.n_tokens());
  for (std::size_t i = 0; i < keys.n_tokens(); ++i) norms[i] = std::max(l2_norm(keys.row(i)), kNormEpsilon);
  return norms;
}

}  // namespace

int kernel_threads() noexcept { return omp_get_max_threads(); }

SimilarityMatrix cosine_similarity_matrix(const TokenMatrix& keys) {
  require_keys(keys);
  const std::size_t n = keys.n_tokens();
  const auto norms = clamped_norms(keys);
  std::vector<double> out(n * n);
  const auto rows = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static) if (n >= kParallelRowThreshold)
  for (std::ptrdiff_t i = 0; i < rows; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    double* dst = out.data() + ui * n;
    for (std::size_t j = 0; j < n; ++j) dst[j] = cosine_entry(keys, norms, ui, j);
  }
  return SimilarityMatrix(n, std::move(out), true);
}

SimilarityMaxima similarity_maxima(const SimilarityMatrix& d) {
  const std::size_t n = d.n();
  SimilarityMaxima m{std::vector<double>(n, kNegInf), std::vector<double>(n, kNegInf)};
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel if (n >= kParallelRowThreshold)
  {
#pragma omp for schedule(static) nowait
    for (std::ptrdiff_t i = 0; i < count; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      double best = kNegInf;
      for (std::size_t j = 0; j < n; ++j) best = std::max(best, d.at(ui, j));
      m.row_max[ui] = best;
    }
    // Column maxima in blocks of kColumnBlock columns, rows scanned inside.
    const auto blocks = static_cast<std::ptrdiff_t>((n + kColumnBlock - 1) / kColumnBlock);
#pragma omp for schedule(static)
    for (std::ptrdiff_t b = 0; b < blocks; ++b) {
      const std::size_t j0 = static_cast<std::size_t>(b) * kColumnBlock;
      const std::size_t j1 = std::min(n, j0 + kColumnBlock);
      double* best = m.col_max.data();
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = j0; j < j1; ++j) best[j] = std::max(best[j], d.at(i, j));
      }
    }
  }
  return m;
}

namespace reference {

SimilarityMatrix cosine_similarity_matrix(const TokenMatrix& keys) {
  require_keys(keys);
  const std::size_t n = keys.n_tokens();
  const auto norms = clamped_norms(keys);
  std::vector<double> out(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = cosine_entry(keys, norms, i, j);
  }
  return SimilarityMatrix(n, std::move(out), true);
}

SimilarityMaxima similarity_maxima(const SimilarityMatrix& d) {
  const std::size_t n = d.n();
  SimilarityMaxima m{std::vector<double>(n, kNegInf), std::vector<double>(n, kNegInf)};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      m.row_max[i] = std::max(m.row_max[i], d.at(i, j));
      m.col_max[j] = std::max(m.col_max[j], d.at(i, j));
    }
  }
  return m;
}

}  // namespace reference
}  // namespace tokmerge
