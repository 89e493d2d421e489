#ifndef RATEVAL_ERROR_H_
#define RATEVAL_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace rateval {

// Every failure the library reports carries one of these codes so callers
// (the CLI in particular) can map failures onto exit codes without parsing
// message text.
enum class ErrorCode {
  // tensor_io
  kIoFailure,
  kMagicMismatch,
  kUnsupportedVersion,
  kUnsupportedDtype,
  kUnsupportedLayout,
  kUnsupportedRank,
  kMalformedHeader,
  kTruncatedPayload,
  kInvalidShape,
  kMaskNotBinary,
  kParseError,
  kDuplicateSampleId,
  kMissingField,
  kConflictingEvidence,
  kConflictingGroundTruth,
  kInvalidField,
  // attribution
  kShapeMismatch,
  kEmptyLayerList,
  kGridMismatch,
  kInvalidCapture,
  // rationality_metrics
  kBoxOutOfBounds,
  kDegenerateBox,
  kInvalidHeatmap,
  kInvalidArgument,
  kEmptyCohort,
  // analysis
  kMissingTag,
  kInvalidTag,
  kEmptyReport,
  // synth
  kInfeasibleTarget,
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code),
        detail_(message) {}

  ErrorCode code() const noexcept { return code_; }
  // The message without the leading error-code name.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace rateval

#endif  // RATEVAL_ERROR_H_
