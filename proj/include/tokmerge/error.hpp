#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tokmerge {

enum class ErrorCode {
  TooFewTokens,
  NonFinite,
  EmptyInput,
  DimensionMismatch,
  LengthMismatch,
  IndexOutOfRange,
  ReductionTooLarge,
  MissingImportance,
  MissingReference,
  InstanceTooLarge,
  InvalidSchedule,
  BadMagic,
  UnsupportedVersion,
  TruncatedPayload,
  MalformedInput,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace tokmerge
