#pragma once

#include <stdexcept>
#include <string>

namespace dirsim {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
    using Error::Error;
};

struct RankDeficient : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

struct InvalidRange : ConfigError {
    using ConfigError::ConfigError;
};

struct NonPositiveDistance : Error {
    using Error::Error;
};

struct DegenerateRealization : Error {
    using Error::Error;
};

struct DegenerateReference : Error {
    using Error::Error;
};

struct AmplitudeOutOfRange : Error {
    using Error::Error;
};

struct TooFewSlots : Error {
    using Error::Error;
};

struct CaseMismatch : Error {
    using Error::Error;
};

struct ShapeMismatch : Error {
    using Error::Error;
};

struct ZeroTruth : Error {
    using Error::Error;
};

}  // namespace dirsim
