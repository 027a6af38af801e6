#pragma once

#include <stdexcept>
#include <string>

namespace mrw {

// Error classes map one-to-one onto the CLI exit codes.
enum class ErrorClass {
  config = 2,
  data = 3,
  numerical = 4,
  validation = 5,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorClass cls, std::string kind, const std::string& what)
      : std::runtime_error(kind + ": " + what), cls_(cls), kind_(std::move(kind)) {}

  ErrorClass error_class() const noexcept { return cls_; }
  int exit_code() const noexcept { return static_cast<int>(cls_); }
  const std::string& kind() const noexcept { return kind_; }

 private:
  ErrorClass cls_;
  std::string kind_;
};

#define MRWLAB_DEFINE_ERROR(Name, Class)                                          \
  class Name : public Error {                                                     \
   public:                                                                        \
    explicit Name(const std::string& what) : Error(ErrorClass::Class, #Name, what) {} \
  };

// core-math
MRWLAB_DEFINE_ERROR(NotPositiveDefinite, numerical)
MRWLAB_DEFINE_ERROR(SpectrumNegative, numerical)
MRWLAB_DEFINE_ERROR(NoConvergence, numerical)
// model configuration
MRWLAB_DEFINE_ERROR(DomainError, config)
MRWLAB_DEFINE_ERROR(ResolutionTooCoarse, config)
MRWLAB_DEFINE_ERROR(ConditionViolated, config)
MRWLAB_DEFINE_ERROR(ConfigError, config)
// estimators and ingestion
MRWLAB_DEFINE_ERROR(NonPositivePrice, data)
MRWLAB_DEFINE_ERROR(DegenerateVariance, data)
MRWLAB_DEFINE_ERROR(TooShort, data)
MRWLAB_DEFINE_ERROR(TooFewPoints, numerical)
MRWLAB_DEFINE_ERROR(ParseError, data)
MRWLAB_DEFINE_ERROR(EmptyFile, data)
MRWLAB_DEFINE_ERROR(NonMonotoneTime, data)
MRWLAB_DEFINE_ERROR(IoError, data)

#undef MRWLAB_DEFINE_ERROR

}  // namespace mrw
