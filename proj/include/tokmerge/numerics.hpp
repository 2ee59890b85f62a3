#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace tokmerge {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Norm floor used by every cosine computation in the library.
inline constexpr double kNormEpsilon = 1e-12;

/// Row-major dense real matrix with finite entries.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  /// Throws NonFinite if any entry is NaN/Inf, DimensionMismatch if
  /// data.size() != rows * cols.
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static DenseMatrix zeros(std::size_t rows, std::size_t cols);
  static DenseMatrix identity(std::size_t n);
  static DenseMatrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<const double> data() const noexcept { return data_; }

  bool operator==(const DenseMatrix&) const = default;

 protected:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// N tokens of dimension d; rows are tokens.
class TokenMatrix : public DenseMatrix {
 public:
  TokenMatrix() = default;
  TokenMatrix(std::size_t n_tokens, std::size_t dim, std::vector<double> data);
  explicit TokenMatrix(DenseMatrix m);

  static TokenMatrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t n_tokens() const noexcept { return rows_; }
  std::size_t dim() const noexcept { return cols_; }
};

/// Square similarity matrix. When the diagonal is excluded, at() reports
/// -inf there; raw() always returns the stored value (kept finite so the
/// matrix serializes cleanly).
class SimilarityMatrix {
 public:
  SimilarityMatrix() = default;
  SimilarityMatrix(std::size_t n, std::vector<double> entries, bool diagonal_excluded = true);

  static SimilarityMatrix from_rows(const std::vector<std::vector<double>>& rows,
                                    bool diagonal_excluded = true);

  std::size_t n() const noexcept { return n_; }
  bool diagonal_excluded() const noexcept { return diagonal_excluded_; }

  double at(std::size_t i, std::size_t j) const noexcept {
    return (i == j && diagonal_excluded_) ? kNegInf : entries_[i * n_ + j];
  }
  double raw(std::size_t i, std::size_t j) const noexcept { return entries_[i * n_ + j]; }
  std::span<const double> entries() const noexcept { return entries_; }

  bool operator==(const SimilarityMatrix&) const = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> entries_;
  bool diagonal_excluded_ = true;
};

/// Bijection on [0, n).
class Permutation {
 public:
  Permutation() = default;
  /// Throws MalformedInput unless `indices` is a bijection on [0, size).
  explicit Permutation(std::vector<std::size_t> indices);

  std::size_t size() const noexcept { return indices_.size(); }
  std::size_t operator[](std::size_t k) const noexcept { return indices_[k]; }
  std::span<const std::size_t> indices() const noexcept { return indices_; }

  /// ranks()[indices()[k]] == k.
  std::vector<std::size_t> ranks() const;

  bool operator==(const Permutation&) const = default;

 private:
  std::vector<std::size_t> indices_;
};

double dot(std::span<const double> a, std::span<const double> b) noexcept;
double l2_norm(std::span<const double> a) noexcept;

/// <a, b> / (max(|a|, eps) * max(|b|, eps)).
double cosine(std::span<const double> a, std::span<const double> b) noexcept;

/// row-vector times matrix: out[k] = sum_j v[j] * m(j, k). Throws DimensionMismatch.
std::vector<double> vec_mat(std::span<const double> v, const DenseMatrix& m);

/// Pairwise cosine similarity of the key rows with the diagonal excluded.
/// Parallel over rows; see kernels.hpp for the serial reference.
SimilarityMatrix cosine_similarity_matrix(const TokenMatrix& keys);

/// Descending order; ties keep ascending original index. -inf sorts last.
Permutation stable_argsort_desc(std::span<const double> values);

/// Max-shifted softmax. Throws EmptyInput / NonFinite.
std::vector<double> softmax(std::span<const double> values);

}  // namespace tokmerge
