#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bodyfit {

enum class ErrorCode {
  InvalidArgument,
  NonPositiveDepth,
  NoSubject,
  ParamOutOfRange,
  Io,
  Format,
  ModelOutOfFrustum,
  MissingSourceJoint,
  Posture,
  DegenerateSkeleton,
  InsufficientContour,
  EmptySection,
  DegenerateInput,
  NotAnEllipse,
  SparseNeighborhood,
  Disconnected,
  MissingDescriptor,
  DimensionMismatch,
  DuplicateId,
  EmptyCloud,
  OutOfChart,
  Internal,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries a code so callers (and the CLI
// exit-code mapping) can branch on the class of error rather than the text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  // Prefixes the message with the stage or measurement that failed.
  Error with_context(std::string_view context) const {
    Error e(*this);
    e.context_ = std::string(context);
    e.what_ = std::string(context) + ": " + runtime_error::what();
    return e;
  }

  const std::string& context() const noexcept { return context_; }
  const char* what() const noexcept override {
    return what_.empty() ? runtime_error::what() : what_.c_str();
  }

 private:
  ErrorCode code_;
  std::string context_;
  std::string what_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace bodyfit
