#include "salient/error.hpp"

namespace salient {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DegenerateFit: return "DegenerateFit";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::SingleCluster: return "SingleCluster";
    case ErrorCode::AmbiguousOrientation: return "AmbiguousOrientation";
    case ErrorCode::DegenerateLandmarks: return "DegenerateLandmarks";
    case ErrorCode::SingularTransform: return "SingularTransform";
    case ErrorCode::MissingAnnotation: return "MissingAnnotation";
    case ErrorCode::FlatImage: return "FlatImage";
    case ErrorCode::BadParams: return "BadParams";
    case ErrorCode::OutOfFrame: return "OutOfFrame";
  }
  return "Unknown";
}

bool is_io_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::BadMagic:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::NonFiniteValue:
    case ErrorCode::IoFailure:
    case ErrorCode::ParseError:
      return true;
    default:
      return false;
  }
}

}  // namespace salient
