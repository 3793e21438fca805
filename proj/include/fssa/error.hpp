#pragma once

#include <stdexcept>
#include <string>

namespace fssa {

/// Base class for every error raised by the library. Precondition
/// violations on user input derive from this type so front ends can map
/// them to a single "user error" exit path.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define FSSA_DEFINE_ERROR(Name)                                   \
    class Name : public Error {                                   \
    public:                                                       \
        explicit Name(const std::string& what) : Error(what) {}   \
    };

FSSA_DEFINE_ERROR(ConfigurationError)
FSSA_DEFINE_ERROR(DomainError)
FSSA_DEFINE_ERROR(DimensionError)
FSSA_DEFINE_ERROR(UnderdeterminedError)
FSSA_DEFINE_ERROR(SingularFitError)
FSSA_DEFINE_ERROR(WindowLengthError)
FSSA_DEFINE_ERROR(BasisDegeneracyError)
FSSA_DEFINE_ERROR(DegenerateSeriesError)
FSSA_DEFINE_ERROR(IndexError)
FSSA_DEFINE_ERROR(GroupingError)
FSSA_DEFINE_ERROR(UndefinedCorrelationError)
FSSA_DEFINE_ERROR(StationarityError)
FSSA_DEFINE_ERROR(FormatError)

#undef FSSA_DEFINE_ERROR

}  // namespace fssa
