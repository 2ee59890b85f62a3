#include "tokmerge/embedding_file.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "tokmerge/error.hpp"

namespace tokmerge {
namespace {

constexpr char kMagic[4] = {'C', 'G', 'E', 'T'};

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  using U = std::conditional_t<sizeof(T) == 2, std::uint16_t, std::uint32_t>;
  const auto bits = std::bit_cast<U>(value);
  for (std::size_t k = 0; k < sizeof(U); ++k) out.push_back(static_cast<std::uint8_t>(bits >> (8 * k)));
}

template <typename U>
U get_le(std::span<const std::uint8_t> bytes, std::size_t offset) {
  U v = 0;
  for (std::size_t k = 0; k < sizeof(U); ++k) v |= static_cast<U>(static_cast<U>(bytes[offset + k]) << (8 * k));
  return v;
}

bool has_magic(std::span<const std::uint8_t> bytes) {
  return bytes.size() >= 4 && std::memcmp(bytes.data(), kMagic, 4) == 0;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_real(std::string_view token) {
  token = trim(token);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc{} || ptr != token.data() + token.size() || token.empty()) {
    throw Error(ErrorCode::MalformedInput, "not a number: '" + std::string(token) + "'");
  }
  if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "non-finite value in text input");
  return v;
}

}  // namespace

std::vector<std::uint8_t> serialize_embedding_file(const EmbeddingFile& file) {
  if (file.payload.size() != static_cast<std::size_t>(file.n) * file.d) {
    throw Error(ErrorCode::DimensionMismatch, "payload length differs from n * d");
  }
  std::vector<std::uint8_t> out;
  out.reserve(kEmbeddingHeaderBytes + 4 * file.payload.size());
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  put_le(out, file.version);
  put_le(out, file.flags);
  put_le(out, file.n);
  put_le(out, file.d);
  for (float v : file.payload) put_le(out, v);
  return out;
}

EmbeddingFile decode_embedding_file(std::span<const std::uint8_t> bytes) {
  if (!has_magic(bytes)) throw Error(ErrorCode::BadMagic, "missing CGET magic");
  if (bytes.size() < kEmbeddingHeaderBytes) throw Error(ErrorCode::TruncatedPayload, "header shorter than 16 bytes");
  EmbeddingFile file;
  file.version = get_le<std::uint16_t>(bytes, 4);
  file.flags = get_le<std::uint16_t>(bytes, 6);
  file.n = get_le<std::uint32_t>(bytes, 8);
  file.d = get_le<std::uint32_t>(bytes, 12);
  if (file.version != kEmbeddingFileVersion) {
    throw Error(ErrorCode::UnsupportedVersion, "version " + std::to_string(file.version));
  }
  if ((file.flags & ~kSimilarityPayloadFlag) != 0) throw Error(ErrorCode::MalformedInput, "unknown flag bits");
  if (file.n == 0 || file.d == 0) throw Error(ErrorCode::MalformedInput, "n and d must be positive");
  if (file.is_similarity() && file.d != file.n) {
    throw Error(ErrorCode::MalformedInput, "similarity payload needs d == n");
  }
  const std::uint64_t count = static_cast<std::uint64_t>(file.n) * file.d;
  const std::uint64_t expected = kEmbeddingHeaderBytes + 4 * count;
  if (bytes.size() != expected) {
    throw Error(ErrorCode::TruncatedPayload, "expected " + std::to_string(expected) + " bytes, got " +
                                                 std::to_string(bytes.size()));
  }
  file.payload.resize(count);
  for (std::uint64_t k = 0; k < count; ++k) {
    const float v = std::bit_cast<float>(get_le<std::uint32_t>(bytes, kEmbeddingHeaderBytes + 4 * k));
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "payload value " + std::to_string(k) + " is NaN/Inf");
    file.payload[k] = v;
  }
  return file;
}

MatrixPayload parse_embedding_file(std::span<const std::uint8_t> bytes) {
  const auto file = decode_embedding_file(bytes);
  std::vector<double> values(file.payload.begin(), file.payload.end());
  if (file.is_similarity()) return SimilarityMatrix(file.n, std::move(values), true);
  return TokenMatrix(file.n, file.d, std::move(values));
}

EmbeddingFile to_embedding_file(const TokenMatrix& tokens) {
  EmbeddingFile f;
  f.n = static_cast<std::uint32_t>(tokens.n_tokens());
  f.d = static_cast<std::uint32_t>(tokens.dim());
  f.payload.assign(tokens.data().begin(), tokens.data().end());
  return f;
}

EmbeddingFile to_embedding_file(const SimilarityMatrix& similarity) {
  EmbeddingFile f;
  f.flags = kSimilarityPayloadFlag;
  f.n = static_cast<std::uint32_t>(similarity.n());
  f.d = f.n;
  f.payload.assign(similarity.entries().begin(), similarity.entries().end());
  return f;
}

TokenMatrix parse_csv_tokens(std::string_view text) {
  std::vector<std::vector<double>> rows;
  while (!text.empty()) {
    const auto eol = text.find('\n');
    const auto line = trim(text.substr(0, eol));
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    if (line.empty() || line.front() == '#') continue;
    std::vector<double> row;
    std::string_view rest = line;
    while (true) {
      const auto comma = rest.find(',');
      row.push_back(parse_real(rest.substr(0, comma)));
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorCode::EmptyInput, "CSV input has no tokens");
  return TokenMatrix::from_rows(rows);
}

std::vector<double> parse_number_list(std::string_view text) {
  std::vector<double> values;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto start = text.find_first_not_of(" \t\r\n,", pos);
    if (start == std::string_view::npos) break;
    auto end = text.find_first_of(" \t\r\n,", start);
    if (end == std::string_view::npos) end = text.size();
    values.push_back(parse_real(text.substr(start, end - start)));
    pos = end;
  }
  return values;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MalformedInput, "cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::MalformedInput, "cannot write '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

MatrixPayload load_matrix_file(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  if (has_magic(bytes)) return parse_embedding_file(bytes);
  return parse_csv_tokens(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

std::vector<double> load_vector_file(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  if (has_magic(bytes)) {
    const auto file = decode_embedding_file(bytes);
    if (file.is_similarity() || (file.n != 1 && file.d != 1)) {
      throw Error(ErrorCode::MalformedInput, "importance file must hold a single row or column");
    }
    return {file.payload.begin(), file.payload.end()};
  }
  auto values = parse_number_list(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  if (values.empty()) throw Error(ErrorCode::EmptyInput, "importance file is empty");
  return values;
}

}  // namespace tokmerge
