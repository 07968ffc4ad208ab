#pragma once

#include <stdexcept>
#include <string>

namespace mnk {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidParameter : Error {
    using Error::Error;
};

struct LengthMismatch : Error {
    using Error::Error;
};

struct MalformedFile : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

struct CapExceeded : Error {
    using Error::Error;
};

struct PointBelowReference : Error {
    using Error::Error;
};

// Raised when a design matrix does not have full column rank; what() names the collinear columns.
struct RankDeficient : Error {
    using Error::Error;
};

// Raised when the expected runtime of a record with zero successful runs is requested.
struct CensoredErt : Error {
    using Error::Error;
};

struct InsufficientData : Error {
    using Error::Error;
};

} // namespace mnk
