#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gsanss {

enum class Errc {
  kRankDeficient,
  kNoConvergence,
  kDimensionMismatch,
  kNotOrthonormal,
  kNonFinite,
  kInvalidBeta,
  kEmptyDatabase,
  kEmptyInput,
  kEmptyIndex,
  kNonUnitVector,
  kDuplicateRecord,
  kOutOfRange,
  kInvalidParams,
  kParseError,
  kInconsistentDimension,
  kIoError,
  kFormatError,
  kConfigMismatch,
};

std::string_view errc_name(Errc code) noexcept;

/// Every failure in the library is reported as an Error carrying a code;
/// the CLI maps codes onto process exit statuses.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what),
        code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace gsanss
