#pragma once

#include <stdexcept>
#include <string>

namespace triage {

// Base for every error the library raises. The kind string is stable and is
// what the CLI and the gateway report to callers.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(kind + ": " + message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define TRIAGE_DEFINE_ERROR(Name)                                        \
  class Name : public Error {                                            \
   public:                                                               \
    explicit Name(const std::string& message) : Error(#Name, message) {} \
  }

TRIAGE_DEFINE_ERROR(UnknownLabel);
TRIAGE_DEFINE_ERROR(ParseError);
TRIAGE_DEFINE_ERROR(ValidationError);
TRIAGE_DEFINE_ERROR(MissingFrame);
TRIAGE_DEFINE_ERROR(DimensionMismatch);
TRIAGE_DEFINE_ERROR(InvalidScript);
TRIAGE_DEFINE_ERROR(GapInTrack);
TRIAGE_DEFINE_ERROR(InsufficientData);
TRIAGE_DEFINE_ERROR(PatternShortage);
TRIAGE_DEFINE_ERROR(EmptySplit);
TRIAGE_DEFINE_ERROR(InvalidThresholds);
TRIAGE_DEFINE_ERROR(Timeout);
TRIAGE_DEFINE_ERROR(ProtocolError);
TRIAGE_DEFINE_ERROR(BadSimplex);
TRIAGE_DEFINE_ERROR(EmptyRun);
TRIAGE_DEFINE_ERROR(ClassMismatch);
TRIAGE_DEFINE_ERROR(BindError);
TRIAGE_DEFINE_ERROR(SourceError);
TRIAGE_DEFINE_ERROR(UnknownTrack);
TRIAGE_DEFINE_ERROR(InvalidStatus);
TRIAGE_DEFINE_ERROR(ConfigError);
TRIAGE_DEFINE_ERROR(IoError);

#undef TRIAGE_DEFINE_ERROR

}  // namespace triage
