#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cog {

enum class ErrorCode {
  kInvalidArgument = 1,
  kBehindCamera,
  kEmptyCloud,
  kImageTooSmall,
  kTooFewPoints,
  kNoPositiveExamples,
  kSingleClass,
  kNoAnnotations,
  kMissingModel,
  kNoCandidates,
  kNoGroundTruth,
  kCountMismatch,
  kMalformed,
  kVersionMismatch,
  kInvalidSpec,
  kIo,
};

std::string_view error_code_name(ErrorCode code);

// All library failures surface as cog::Error; the code drives CLI exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace cog
