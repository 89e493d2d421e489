#include "rateval/error.h"

namespace rateval {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIoFailure: return "IoFailure";
    case ErrorCode::kMagicMismatch: return "MagicMismatch";
    case ErrorCode::kUnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::kUnsupportedDtype: return "UnsupportedDtype";
    case ErrorCode::kUnsupportedLayout: return "UnsupportedLayout";
    case ErrorCode::kUnsupportedRank: return "UnsupportedRank";
    case ErrorCode::kMalformedHeader: return "MalformedHeader";
    case ErrorCode::kTruncatedPayload: return "TruncatedPayload";
    case ErrorCode::kInvalidShape: return "InvalidShape";
    case ErrorCode::kMaskNotBinary: return "MaskNotBinary";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kDuplicateSampleId: return "DuplicateSampleId";
    case ErrorCode::kMissingField: return "MissingField";
    case ErrorCode::kConflictingEvidence: return "ConflictingEvidence";
    case ErrorCode::kConflictingGroundTruth: return "ConflictingGroundTruth";
    case ErrorCode::kInvalidField: return "InvalidField";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kEmptyLayerList: return "EmptyLayerList";
    case ErrorCode::kGridMismatch: return "GridMismatch";
    case ErrorCode::kInvalidCapture: return "InvalidCapture";
    case ErrorCode::kBoxOutOfBounds: return "BoxOutOfBounds";
    case ErrorCode::kDegenerateBox: return "DegenerateBox";
    case ErrorCode::kInvalidHeatmap: return "InvalidHeatmap";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kEmptyCohort: return "EmptyCohort";
    case ErrorCode::kMissingTag: return "MissingTag";
    case ErrorCode::kInvalidTag: return "InvalidTag";
    case ErrorCode::kEmptyReport: return "EmptyReport";
    case ErrorCode::kInfeasibleTarget: return "InfeasibleTarget";
  }
  return "Unknown";
}

}  // namespace rateval
