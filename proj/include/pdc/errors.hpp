#pragma once

#include <stdexcept>
#include <string>

namespace pdc {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonPositiveInput : Error {
    using Error::Error;
};
struct DegenerateAdvance : Error {
    using Error::Error;
};
struct InvalidSchmidtDomain : Error {
    using Error::Error;
};
struct ZeroMagnification : Error {
    using Error::Error;
};
struct InvalidProbability : Error {
    using Error::Error;
};
struct ZeroDispersion : Error {
    using Error::Error;
};
struct ImagingConditionViolated : Error {
    using Error::Error;
};
struct OrderOutOfRange : Error {
    using Error::Error;
};
struct GridTooCoarse : Error {
    using Error::Error;
};
struct OutOfGrid : Error {
    using Error::Error;
};
struct NotPositiveDefinite : Error {
    using Error::Error;
};
struct SvdFailure : Error {
    using Error::Error;
};
struct ConfigInvalid : Error {
    using Error::Error;
};
struct EmptyRecord : Error {
    using Error::Error;
};
struct WindowTooWide : Error {
    using Error::Error;
};
struct NoHeralds : Error {
    using Error::Error;
};
struct FitDiverged : Error {
    using Error::Error;
};

} // namespace pdc
