#pragma once

#include <stdexcept>
#include <string>

namespace eipl {

/// Base class for every domain error raised by the engine. The CLI maps
/// these to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define EIPL_DEFINE_ERROR(Name, Base)   \
  class Name : public Base {            \
   public:                              \
    using Base::Base;                   \
  }

// codegen
EIPL_DEFINE_ERROR(GenerationError, Error);
EIPL_DEFINE_ERROR(TransportError, GenerationError);
// Retried by the generation retry policy; a RateLimitError that survives
// every retry surfaces as QuotaError.
EIPL_DEFINE_ERROR(RetryableTransportError, TransportError);
EIPL_DEFINE_ERROR(RateLimitError, RetryableTransportError);
EIPL_DEFINE_ERROR(QuotaError, GenerationError);
EIPL_DEFINE_ERROR(EmptyCompletionError, GenerationError);
EIPL_DEFINE_ERROR(ExtractionError, Error);
EIPL_DEFINE_ERROR(NameMismatchError, ExtractionError);
EIPL_DEFINE_ERROR(NoCodeError, ExtractionError);

// execution
EIPL_DEFINE_ERROR(BackendUnavailableError, Error);
EIPL_DEFINE_ERROR(UnknownCodeError, Error);
EIPL_DEFINE_ERROR(ProtocolError, Error);

// grading
EIPL_DEFINE_ERROR(AttemptLimitExceeded, Error);

// psychometrics
EIPL_DEFINE_ERROR(EmptyMaskError, Error);
EIPL_DEFINE_ERROR(NonFiniteLossError, Error);
EIPL_DEFINE_ERROR(OutOfRangeError, Error);
EIPL_DEFINE_ERROR(LengthMismatchError, Error);

// storage
EIPL_DEFINE_ERROR(ParseError, Error);
EIPL_DEFINE_ERROR(DuplicateIdError, Error);
EIPL_DEFINE_ERROR(InvalidArgumentError, Error);

#undef EIPL_DEFINE_ERROR

}  // namespace eipl
