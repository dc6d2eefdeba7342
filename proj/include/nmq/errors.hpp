#pragma once

#include <stdexcept>
#include <string>

namespace nmq {

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define NMQ_ERROR_TYPE(Name)                                            \
  struct Name : Error {                                                 \
    explicit Name(const std::string& what) : Error(#Name ": " + what) {} \
  }

NMQ_ERROR_TYPE(NonPhysicalInput);
NMQ_ERROR_TYPE(NoConvergence);
NMQ_ERROR_TYPE(QuadratureUnderResolved);
NMQ_ERROR_TYPE(BlowUp);
NMQ_ERROR_TYPE(ConfigMismatch);
NMQ_ERROR_TYPE(NonZeroMean);
NMQ_ERROR_TYPE(InsufficientRecords);
NMQ_ERROR_TYPE(ParseError);
NMQ_ERROR_TYPE(ValidationError);
NMQ_ERROR_TYPE(CorruptFile);
NMQ_ERROR_TYPE(GridMismatch);
NMQ_ERROR_TYPE(PhysicalityViolated);

#undef NMQ_ERROR_TYPE

}  // namespace nmq
