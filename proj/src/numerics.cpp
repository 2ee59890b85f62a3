#include "tokmerge/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "tokmerge/error.hpp"

namespace tokmerge {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::TooFewTokens: return "TooFewTokens";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::ReductionTooLarge: return "ReductionTooLarge";
    case ErrorCode::MissingImportance: return "MissingImportance";
    case ErrorCode::MissingReference: return "MissingReference";
    case ErrorCode::InstanceTooLarge: return "InstanceTooLarge";
    case ErrorCode::InvalidSchedule: return "InvalidSchedule";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::TruncatedPayload: return "TruncatedPayload";
    case ErrorCode::MalformedInput: return "MalformedInput";
  }
  return "Unknown";
}

namespace {

void require_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, std::string(what) + " contains NaN/Inf");
  }
}

std::vector<double> flatten_rows(const std::vector<std::vector<double>>& rows, std::size_t& cols) {
  cols = rows.empty() ? 0 : rows.front().size();
  std::vector<double> flat;
  flat.reserve(rows.size() * cols);
  for (const auto& r : rows) {
    if (r.size() != cols) throw Error(ErrorCode::DimensionMismatch, "ragged rows");
    flat.insert(flat.end(), r.begin(), r.end());
  }
  return flat;
}

}  // namespace

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw Error(ErrorCode::DimensionMismatch,
                "matrix data length " + std::to_string(data_.size()) + " != " +
                    std::to_string(rows_) + "x" + std::to_string(cols_));
  }
  require_finite(data_, "matrix");
}

DenseMatrix DenseMatrix::zeros(std::size_t rows, std::size_t cols) {
  return DenseMatrix(rows, cols, std::vector<double>(rows * cols, 0.0));
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  std::vector<double> d(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) d[i * n + i] = 1.0;
  return DenseMatrix(n, n, std::move(d));
}

DenseMatrix DenseMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  std::size_t cols = 0;
  auto flat = flatten_rows(rows, cols);
  return DenseMatrix(rows.size(), cols, std::move(flat));
}

TokenMatrix::TokenMatrix(std::size_t n_tokens, std::size_t dim, std::vector<double> data)
    : DenseMatrix(n_tokens, dim, std::move(data)) {
  if (n_tokens == 0 || dim == 0) throw Error(ErrorCode::EmptyInput, "token matrix needs n_tokens, dim > 0");
}

TokenMatrix::TokenMatrix(DenseMatrix m) : DenseMatrix(std::move(m)) {
  if (rows_ == 0 || cols_ == 0) throw Error(ErrorCode::EmptyInput, "token matrix needs n_tokens, dim > 0");
}

TokenMatrix TokenMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  return TokenMatrix(DenseMatrix::from_rows(rows));
}

SimilarityMatrix::SimilarityMatrix(std::size_t n, std::vector<double> entries, bool diagonal_excluded)
    : n_(n), entries_(std::move(entries)), diagonal_excluded_(diagonal_excluded) {
  if (n_ == 0) throw Error(ErrorCode::EmptyInput, "similarity matrix needs n > 0");
  if (entries_.size() != n_ * n_) throw Error(ErrorCode::DimensionMismatch, "similarity matrix must be n x n");
  require_finite(entries_, "similarity matrix");
}

SimilarityMatrix SimilarityMatrix::from_rows(const std::vector<std::vector<double>>& rows,
                                             bool diagonal_excluded) {
  std::size_t cols = 0;
  auto flat = flatten_rows(rows, cols);
  if (cols != rows.size()) throw Error(ErrorCode::DimensionMismatch, "similarity matrix must be square");
  return SimilarityMatrix(rows.size(), std::move(flat), diagonal_excluded);
}

Permutation::Permutation(std::vector<std::size_t> indices) : indices_(std::move(indices)) {
  std::vector<bool> seen(indices_.size(), false);
  for (std::size_t v : indices_) {
    if (v >= indices_.size() || seen[v]) throw Error(ErrorCode::MalformedInput, "not a permutation");
    seen[v] = true;
  }
}

std::vector<std::size_t> Permutation::ranks() const {
  std::vector<std::size_t> r(indices_.size());
  for (std::size_t k = 0; k < indices_.size(); ++k) r[indices_[k]] = k;
  return r;
}

double dot(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t k = 0; k < n; ++k) s += a[k] * b[k];
  return s;
}

double l2_norm(std::span<const double> a) noexcept { return std::sqrt(dot(a, a)); }

double cosine(std::span<const double> a, std::span<const double> b) noexcept {
  return dot(a, b) / (std::max(l2_norm(a), kNormEpsilon) * std::max(l2_norm(b), kNormEpsilon));
}

std::vector<double> vec_mat(std::span<const double> v, const DenseMatrix& m) {
  if (v.size() != m.rows()) {
    throw Error(ErrorCode::DimensionMismatch,
                "vector length " + std::to_string(v.size()) + " vs matrix rows " + std::to_string(m.rows()));
  }
  std::vector<double> out(m.cols(), 0.0);
  for (std::size_t j = 0; j < m.rows(); ++j) {
    const auto row = m.row(j);
    for (std::size_t k = 0; k < m.cols(); ++k) out[k] += v[j] * row[k];
  }
  return out;
}

Permutation stable_argsort_desc(std::span<const double> values) {
  std::vector<std::size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  return Permutation(std::move(idx));
}

std::vector<double> softmax(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::EmptyInput, "softmax of empty sequence");
  require_finite(values, "softmax input");
  const double shift = *std::max_element(values.begin(), values.end());
  std::vector<double> out(values.size());
  double total = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    out[k] = std::exp(values[k] - shift);
    total += out[k];
  }
  for (double& v : out) v /= total;
  return out;
}

}  // namespace tokmerge
