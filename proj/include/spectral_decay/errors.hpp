#pragma once

#include <stdexcept>
#include <string>

namespace spectral_decay {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define SPECTRAL_DECAY_ERROR(Name)          \
  class Name : public Error {               \
   public:                                  \
    explicit Name(const std::string& what)  \
        : Error(#Name ": " + what) {}       \
  }

// Input documents.
SPECTRAL_DECAY_ERROR(SchemaError);
SPECTRAL_DECAY_ERROR(ValidationError);
SPECTRAL_DECAY_ERROR(DimensionMismatch);

// Integration.
SPECTRAL_DECAY_ERROR(StepFailure);

// Floquet / band structure.
SPECTRAL_DECAY_ERROR(BandPointError);
SPECTRAL_DECAY_ERROR(OutOfCertifiedRange);
SPECTRAL_DECAY_ERROR(SingularWronskian);

// Root finding and eigen-assembly.
SPECTRAL_DECAY_ERROR(NoSignChange);
SPECTRAL_DECAY_ERROR(DegenerateMatch);
SPECTRAL_DECAY_ERROR(OutsideGap);

// Decay analysis.
SPECTRAL_DECAY_ERROR(InsufficientTail);
SPECTRAL_DECAY_ERROR(PoorFit);
SPECTRAL_DECAY_ERROR(ClosedGap);
SPECTRAL_DECAY_ERROR(InsufficientApproach);

#undef SPECTRAL_DECAY_ERROR

}  // namespace spectral_decay
