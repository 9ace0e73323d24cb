#pragma once

#include <stdexcept>
#include <string>

namespace cfl {

// All library errors derive from Error so callers can catch one base type.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// A real value does not fit the fixed-point range after rounding, or a
// quantized dataset would exceed its headroom budget.
class OverflowError : public Error {
public:
    using Error::Error;
};

// Two fixed-point operands carry different (k, f) layouts.
class SpecMismatchError : public Error {
public:
    using Error::Error;
};

// Matrix shapes are incompatible for the requested operation.
class DimensionError : public Error {
public:
    using Error::Error;
};

// A local linear solve during code construction stayed singular after the
// bounded number of retries.
class SingularSystemError : public Error {
public:
    using Error::Error;
};

// Fewer responders than the minimum the code can decode from.
class InsufficientDevicesError : public Error {
public:
    using Error::Error;
};

// A decoding vector missed the configured residual tolerance.
class ResidualToleranceError : public Error {
public:
    using Error::Error;
};

// Malformed input file (dataset, code dump); message carries the position.
class FormatError : public Error {
public:
    using Error::Error;
};

// Invalid run configuration; message names the offending field path.
class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace cfl
