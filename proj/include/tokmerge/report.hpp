#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tokmerge/matching.hpp"

namespace tokmerge {

inline constexpr int kReportSchemaVersion = 1;
inline constexpr std::string_view kToolVersion = "0.3.0";

/// Outcome of one `match` run.
struct RunReport {
  int schema_version = kReportSchemaVersion;
  std::string tool_version{kToolVersion};
  std::string method;
  std::size_t n = 0;
  std::size_t r = 0;
  std::uint64_t seed = 0;
  std::vector<TokenPair> pairs;
  std::vector<std::vector<std::size_t>> stacks;
  double objective = 0.0;
  std::size_t degenerate_fallbacks = 0;
  /// Present only when timing was requested, so default reports stay
  /// byte-identical across runs.
  std::optional<std::int64_t> timing_us;

  bool operator==(const RunReport&) const = default;
};

/// Pretty-printed JSON, keys in declaration order, trailing newline.
std::string serialize_report(const RunReport& report);

/// Throws MalformedInput on schema violations.
RunReport parse_report(const std::string& text);

}  // namespace tokmerge
