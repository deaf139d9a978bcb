#pragma once

#include <stdexcept>
#include <string>

namespace dnt {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation (p not in (0,1), bad params).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Sample with zero spread or too few observations.
class DegenerateSampleError : public Error {
public:
    using Error::Error;
};

/// Vector/matrix/raster sizes that do not line up.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Metric learning or model training could not produce a usable result.
class TrainingError : public Error {
public:
    using Error::Error;
};

/// Malformed model, table, config or data file.
class FormatError : public Error {
public:
    using Error::Error;
};

class UnsupportedVersionError : public FormatError {
public:
    using FormatError::FormatError;
};

/// File could not be opened, read or written.
class IoError : public Error {
public:
    using Error::Error;
};

/// Invalid run/train configuration (unknown key, bad value, unknown method).
class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace dnt
