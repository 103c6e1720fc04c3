#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace salient {

enum class ErrorCode {
  BadMagic,
  DimensionMismatch,
  NonFiniteValue,
  OutOfRange,
  IoFailure,
  ParseError,
  DegenerateFit,
  GridMismatch,
  TooFewSamples,
  SingleCluster,
  AmbiguousOrientation,
  DegenerateLandmarks,
  SingularTransform,
  MissingAnnotation,
  FlatImage,
  BadParams,
  OutOfFrame,
};

std::string_view to_string(ErrorCode code);

/// True for failures caused by reading or writing files (CLI exit code 2).
bool is_io_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace salient
