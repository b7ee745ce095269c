#pragma once

#include <stdexcept>
#include <string>

namespace riscrlb {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// MS sits (numerically) on the vertical line through an RIS element, so
/// azimuth and its derivatives are undefined.
struct DegenerateGeometry : Error {
    using Error::Error;
};

struct DimensionMismatch : Error {
    using Error::Error;
};

struct IndexOutOfRange : Error {
    using Error::Error;
};

/// The 2x2 position FIM is singular relative to its scale; the position is
/// unidentifiable for this geometry / phase configuration.
struct SingularFim : Error {
    using Error::Error;
};

struct LineSearchFailed : Error {
    using Error::Error;
};

struct GridTooLarge : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

} // namespace riscrlb
