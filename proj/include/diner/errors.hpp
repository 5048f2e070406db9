#pragma once

#include <stdexcept>
#include <string>

namespace diner {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Incompatible tensor/grid dimensions.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Unsupported size (e.g. non-power-of-two FFT extent).
class SizeError : public Error {
public:
    using Error::Error;
};

/// Non-finite value or diverging computation.
class NumericError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration or argument combination.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Out-of-range element access.
class IndexError : public Error {
public:
    using Error::Error;
};

/// Filesystem failure (missing file, unwritable path).
class IoError : public Error {
public:
    using Error::Error;
};

/// Malformed file contents (bad magic, version mismatch, truncated payload).
class FormatError : public Error {
public:
    using Error::Error;
};

/// A coordinate range collapsed to a single point.
class DegenerateRangeError : public Error {
public:
    using Error::Error;
};

/// Propagation parameters violate the sampling (aliasing) limit.
class SamplingError : public Error {
public:
    using Error::Error;
};

} // namespace diner
