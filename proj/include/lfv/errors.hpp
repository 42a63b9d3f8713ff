#pragma once

#include <stdexcept>
#include <string>

namespace lfv {

// Base of every error thrown by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define LFV_DEFINE_ERROR(Name)                 \
  class Name : public Error {                  \
   public:                                     \
    using Error::Error;                        \
  }

LFV_DEFINE_ERROR(QuadratureDivergence);
LFV_DEFINE_ERROR(SingularEndpoint);
LFV_DEFINE_ERROR(OutOfRange);
LFV_DEFINE_ERROR(DomainError);
LFV_DEFINE_ERROR(InvalidMeasure);
LFV_DEFINE_ERROR(InvalidPartition);
LFV_DEFINE_ERROR(AtomAtOne);
LFV_DEFINE_ERROR(DivisionNearZero);
LFV_DEFINE_ERROR(AllCensored);
LFV_DEFINE_ERROR(RateOverflow);
LFV_DEFINE_ERROR(GridTooCoarse);
LFV_DEFINE_ERROR(DegenerateCloud);
LFV_DEFINE_ERROR(WrongInitialization);
LFV_DEFINE_ERROR(InvariantViolation);
LFV_DEFINE_ERROR(IoError);

#undef LFV_DEFINE_ERROR

// Configuration problems carry the dotted path of the offending field.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& message)
      : Error(field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace lfv
