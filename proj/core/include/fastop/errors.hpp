#pragma once

#include <stdexcept>
#include <string>

namespace fastop {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define FASTOP_DEFINE_ERROR(Name)            \
    class Name : public Error {              \
    public:                                  \
        using Error::Error;                  \
    }

FASTOP_DEFINE_ERROR(DimensionMismatch);
FASTOP_DEFINE_ERROR(MaterializationTooLarge);
FASTOP_DEFINE_ERROR(NotPowerOfTwo);
FASTOP_DEFINE_ERROR(EmptyInput);
FASTOP_DEFINE_ERROR(IndexOutOfRange);
FASTOP_DEFINE_ERROR(OrderTooLarge);
FASTOP_DEFINE_ERROR(ChainMismatch);
FASTOP_DEFINE_ERROR(TooFewFactors);
FASTOP_DEFINE_ERROR(DimensionOverflow);
FASTOP_DEFINE_ERROR(RaggedGrid);
FASTOP_DEFINE_ERROR(BlockShapeMismatch);
FASTOP_DEFINE_ERROR(NonSquare);
FASTOP_DEFINE_ERROR(NegativeThreshold);
FASTOP_DEFINE_ERROR(BreakdownError);
FASTOP_DEFINE_ERROR(KOutOfRange);
FASTOP_DEFINE_ERROR(UnknownScenario);
FASTOP_DEFINE_ERROR(IoError);
FASTOP_DEFINE_ERROR(InvalidArgument);
FASTOP_DEFINE_ERROR(VerificationFailure);

#undef FASTOP_DEFINE_ERROR

}  // namespace fastop
