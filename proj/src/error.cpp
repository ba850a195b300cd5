#include "cog/error.hpp"

namespace cog {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kBehindCamera: return "BehindCamera";
    case ErrorCode::kEmptyCloud: return "EmptyCloud";
    case ErrorCode::kImageTooSmall: return "ImageTooSmall";
    case ErrorCode::kTooFewPoints: return "TooFewPoints";
    case ErrorCode::kNoPositiveExamples: return "NoPositiveExamples";
    case ErrorCode::kSingleClass: return "SingleClass";
    case ErrorCode::kNoAnnotations: return "NoAnnotations";
    case ErrorCode::kMissingModel: return "MissingModel";
    case ErrorCode::kNoCandidates: return "NoCandidates";
    case ErrorCode::kNoGroundTruth: return "NoGroundTruth";
    case ErrorCode::kCountMismatch: return "CountMismatch";
    case ErrorCode::kMalformed: return "Malformed";
    case ErrorCode::kVersionMismatch: return "VersionMismatch";
    case ErrorCode::kInvalidSpec: return "InvalidSpec";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

}  // namespace cog
