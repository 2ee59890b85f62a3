#pragma once

// Data-parallel building blocks. Each OpenMP kernel has a plain serial twin
// in namespace `reference`; tests assert the two agree bit for bit.

#include <cstddef>
#include <vector>

#include "tokmerge/numerics.hpp"

namespace tokmerge {

/// Below this many rows the OpenMP kernels run on the calling thread.
inline constexpr std::size_t kParallelRowThreshold = 96;

struct SimilarityMaxima {
  std::vector<double> row_max;  // max_j D(i, j), diagonal excluded
  std::vector<double> col_max;  // max_i D(i, j), diagonal excluded
};

SimilarityMaxima similarity_maxima(const SimilarityMatrix& d);

/// Number of OpenMP threads kernels will use (1 without OpenMP).
int kernel_threads() noexcept;

namespace reference {

SimilarityMatrix cosine_similarity_matrix(const TokenMatrix& keys);
SimilarityMaxima similarity_maxima(const SimilarityMatrix& d);

}  // namespace reference
}  // namespace tokmerge
