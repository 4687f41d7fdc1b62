#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace blindmatch {

enum class ErrorCode {
  kMissingFile,
  kShapeMismatch,
  kChecksumMismatch,
  kNonFinite,
  kMalformedManifest,
  kZeroRow,
  kUnlabeled,
  kInvalidArgument,
  kSizeMismatch,
  kKindMismatch,
  kAsymmetric,
  kSingularKernel,
  kTooLarge,
  kInvalidConfig,
  kIo,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure the library reports carries one of the codes above so callers
// (and the CLI exit status) can tell the classes apart without parsing text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kMissingFile: return "missing_file";
    case ErrorCode::kShapeMismatch: return "shape_mismatch";
    case ErrorCode::kChecksumMismatch: return "checksum_mismatch";
    case ErrorCode::kNonFinite: return "non_finite";
    case ErrorCode::kMalformedManifest: return "malformed_manifest";
    case ErrorCode::kZeroRow: return "zero_row";
    case ErrorCode::kUnlabeled: return "unlabeled";
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kSizeMismatch: return "size_mismatch";
    case ErrorCode::kKindMismatch: return "kind_mismatch";
    case ErrorCode::kAsymmetric: return "asymmetric";
    case ErrorCode::kSingularKernel: return "singular_kernel";
    case ErrorCode::kTooLarge: return "too_large";
    case ErrorCode::kInvalidConfig: return "invalid_config";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

}  // namespace blindmatch
