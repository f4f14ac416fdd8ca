#pragma once

#include <stdexcept>
#include <string>

namespace vme {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define VME_DEFINE_ERROR(Name)                                  \
    class Name : public Error {                                 \
    public:                                                     \
        explicit Name(const std::string& what) : Error(what) {} \
    }

VME_DEFINE_ERROR(NonHermitianInput);
VME_DEFINE_ERROR(DimensionMismatch);
VME_DEFINE_ERROR(ConvergenceFailure);
VME_DEFINE_ERROR(UnsupportedDimension);
VME_DEFINE_ERROR(NormViolation);
VME_DEFINE_ERROR(NearZeroEnergy);
VME_DEFINE_ERROR(SingularSystem);
VME_DEFINE_ERROR(MaxIterations);
VME_DEFINE_ERROR(ComplexResidue);
VME_DEFINE_ERROR(CacheMiss);
VME_DEFINE_ERROR(BoundViolation);
VME_DEFINE_ERROR(EmptyGroup);
VME_DEFINE_ERROR(InvalidArgument);
VME_DEFINE_ERROR(ConfigError);
VME_DEFINE_ERROR(IoError);

#undef VME_DEFINE_ERROR

}  // namespace vme
