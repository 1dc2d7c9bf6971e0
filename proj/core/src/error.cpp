#include "gsanss/error.hpp"

namespace gsanss {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::kRankDeficient: return "RankDeficient";
    case Errc::kNoConvergence: return "NoConvergence";
    case Errc::kDimensionMismatch: return "DimensionMismatch";
    case Errc::kNotOrthonormal: return "NotOrthonormal";
    case Errc::kNonFinite: return "NonFinite";
    case Errc::kInvalidBeta: return "InvalidBeta";
    case Errc::kEmptyDatabase: return "EmptyDatabase";
    case Errc::kEmptyInput: return "EmptyInput";
    case Errc::kEmptyIndex: return "EmptyIndex";
    case Errc::kNonUnitVector: return "NonUnitVector";
    case Errc::kDuplicateRecord: return "DuplicateRecord";
    case Errc::kOutOfRange: return "OutOfRange";
    case Errc::kInvalidParams: return "InvalidParams";
    case Errc::kParseError: return "ParseError";
    case Errc::kInconsistentDimension: return "InconsistentDimension";
    case Errc::kIoError: return "IoError";
    case Errc::kFormatError: return "FormatError";
    case Errc::kConfigMismatch: return "ConfigMismatch";
  }
  return "Unknown";
}

}  // namespace gsanss
