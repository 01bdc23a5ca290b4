#pragma once

#include <stdexcept>
#include <string>

namespace egonav {

// Every error raised by the library derives from Error so callers (the CLI in
// particular) can catch one type and still report the specific condition.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define EGONAV_DEFINE_ERROR(Name)                                   \
  class Name : public Error {                                       \
   public:                                                          \
    explicit Name(const std::string& what) : Error(#Name ": " + what) {} \
  }

EGONAV_DEFINE_ERROR(DegenerateInput);
EGONAV_DEFINE_ERROR(InvalidRotation);
EGONAV_DEFINE_ERROR(ShapeMismatch);
EGONAV_DEFINE_ERROR(NoPath);
EGONAV_DEFINE_ERROR(EmptyBuffer);
EGONAV_DEFINE_ERROR(DataTooSmall);
EGONAV_DEFINE_ERROR(InvalidRange);
EGONAV_DEFINE_ERROR(InvalidSteps);
EGONAV_DEFINE_ERROR(NoSurvivors);
EGONAV_DEFINE_ERROR(LengthMismatch);
EGONAV_DEFINE_ERROR(BatchTooSmall);
EGONAV_DEFINE_ERROR(InvalidGrid);
EGONAV_DEFINE_ERROR(IoFailure);
EGONAV_DEFINE_ERROR(ParseError);
EGONAV_DEFINE_ERROR(AgentStuck);

#undef EGONAV_DEFINE_ERROR

}  // namespace egonav
