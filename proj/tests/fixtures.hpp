#pragma once

// Shared test inputs and test-only oracles. Nothing here calls into the
// code paths it is used to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "tokmerge/error.hpp"
#include "tokmerge/numerics.hpp"

#define EXPECT_ERROR_CODE(stmt, expected)                                  \
  do {                                                                     \
    try {                                                                  \
      stmt;                                                                \
      ADD_FAILURE() << "expected " << ::tokmerge::to_string(expected);   \
    } catch (const ::tokmerge::Error& e) {                                 \
      EXPECT_EQ(e.code(), expected) << e.what();                           \
    }                                                                      \
  } while (0)

namespace tokmerge::test {

inline SimilarityMatrix symmetric_from_upper(std::size_t n, const std::vector<double>& upper) {
  std::vector<std::vector<double>> rows(n, std::vector<double>(n, 0.0));
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) rows[i][j] = rows[j][i] = upper[k++];
  }
  return SimilarityMatrix::from_rows(rows);
}

// Worked 4-token cases; T1..T4 map to indices 0..3. Case 2 is 1 - case 1.
inline SimilarityMatrix case1() { return symmetric_from_upper(4, {0.4, 0.1, 0.5, 0.6, 0.2, 0.3}); }
inline SimilarityMatrix case2() { return symmetric_from_upper(4, {0.6, 0.9, 0.5, 0.4, 0.8, 0.7}); }

inline SimilarityMatrix random_symmetric(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> upper(n * (n - 1) / 2);
  for (double& v : upper) v = u(rng);
  return symmetric_from_upper(n, upper);
}

inline TokenMatrix random_tokens(std::size_t n, std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> data(n * dim);
  for (double& v : data) v = g(rng);
  return TokenMatrix(n, dim, std::move(data));
}

// Scalar cosine written out longhand.
inline double scalar_cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    ab += a[k] * b[k];
    aa += a[k] * a[k];
    bb += b[k] * b[k];
  }
  return ab / (std::max(std::sqrt(aa), 1e-12) * std::max(std::sqrt(bb), 1e-12));
}

// Direct JS divergence of two explicit distributions, natural log.
inline double js_direct(const std::vector<double>& p, const std::vector<double>& q) {
  double s = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double m = 0.5 * (p[k] + q[k]);
    if (p[k] > 0) s += 0.5 * p[k] * std::log(p[k] / m);
    if (q[k] > 0) s += 0.5 * q[k] * std::log(q[k] / m);
  }
  return s;
}

// Optimum of the pair-sum objective via source subsets: for a fixed source
// set each source independently takes its best non-source destination.
inline double subset_optimum(const SimilarityMatrix& d, std::size_t r) {
  const std::size_t n = d.n();
  double best = -std::numeric_limits<double>::infinity();
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) != r) continue;
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!(mask >> i & 1u)) continue;
      double m = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i && !(mask >> j & 1u)) m = std::max(m, d.raw(i, j));
      }
      s += m;
    }
    best = std::max(best, s);
  }
  return best;
}

}  // namespace tokmerge::test
