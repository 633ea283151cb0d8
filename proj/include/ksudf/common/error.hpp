#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ksudf {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input data violates a precondition (empty mesh, coincident vertices...).
class InvalidInputError : public Error {
public:
    using Error::Error;
};

/// An argument is out of range for the requested operation.
class InvalidArgumentError : public Error {
public:
    using Error::Error;
};

/// A file could not be parsed. `location()` is a line number for text
/// formats and a byte offset for binary ones.
class FormatError : public Error {
public:
    FormatError(const std::string& what, std::size_t location)
        : Error(what + " (at " + std::to_string(location) + ")"), location_(location) {}
    std::size_t location() const noexcept { return location_; }

private:
    std::size_t location_;
};

class DegenerateFrameError : public Error {
public:
    using Error::Error;
};

/// Too few observations for a statistical test.
class InsufficientSampleError : public Error {
public:
    using Error::Error;
};

class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, int epoch) : Error(what), epoch_(epoch) {}
    int epoch() const noexcept { return epoch_; }

private:
    int epoch_;
};

class CapacityError : public Error {
public:
    using Error::Error;
};

/// A metric was requested on data for which it is not defined.
class UndefinedMetricError : public Error {
public:
    using Error::Error;
};

}  // namespace ksudf
