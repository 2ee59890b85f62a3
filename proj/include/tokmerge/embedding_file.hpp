#pragma once

// Binary token/similarity container ("CGET" files) and the CSV fallback.
//
// Layout, all little-endian:
//   offset 0   4 bytes  magic "CGET"
//   offset 4   u16      version (1)
//   offset 6   u16      flags (bit 0: payload is an n x n similarity matrix)
//   offset 8   u32      n
//   offset 12  u32      d (equals n when bit 0 is set)
//   offset 16  f32[n*d] row-major payload

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "tokmerge/numerics.hpp"

namespace tokmerge {

inline constexpr std::uint16_t kEmbeddingFileVersion = 1;
inline constexpr std::uint16_t kSimilarityPayloadFlag = 0x1;
inline constexpr std::size_t kEmbeddingHeaderBytes = 16;

struct EmbeddingFile {
  std::uint16_t version = kEmbeddingFileVersion;
  std::uint16_t flags = 0;
  std::uint32_t n = 0;
  std::uint32_t d = 0;
  std::vector<float> payload;

  bool is_similarity() const noexcept { return (flags & kSimilarityPayloadFlag) != 0; }
  bool operator==(const EmbeddingFile&) const = default;
};

using MatrixPayload = std::variant<TokenMatrix, SimilarityMatrix>;

std::vector<std::uint8_t> serialize_embedding_file(const EmbeddingFile& file);

/// Header and payload checks only. Throws BadMagic, UnsupportedVersion,
/// TruncatedPayload, MalformedInput, NonFinite.
EmbeddingFile decode_embedding_file(std::span<const std::uint8_t> bytes);

/// Typed view of a decoded file; similarity payloads get the diagonal excluded.
MatrixPayload parse_embedding_file(std::span<const std::uint8_t> bytes);

EmbeddingFile to_embedding_file(const TokenMatrix& tokens);
EmbeddingFile to_embedding_file(const SimilarityMatrix& similarity);

/// One token per line, comma-separated reals. Blank lines and lines starting
/// with '#' are skipped.
TokenMatrix parse_csv_tokens(std::string_view text);

/// Reals separated by commas, whitespace or newlines.
std::vector<double> parse_number_list(std::string_view text);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

/// Binary if the file starts with the magic, CSV tokens otherwise.
MatrixPayload load_matrix_file(const std::filesystem::path& path);

/// Importance scores: a binary file with n x 1 / 1 x n payload, or a number list.
std::vector<double> load_vector_file(const std::filesystem::path& path);

}  // namespace tokmerge
