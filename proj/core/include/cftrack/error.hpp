#pragma once

#include <stdexcept>
#include <string>

namespace cftrack {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Two arrays (or an array and a declared grid) disagree in shape.
class GridMismatch : public Error {
public:
    using Error::Error;
};

/// A precondition on a scalar argument was violated.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Malformed input file (feature channels, annotations, images).
class ParseError : public Error {
public:
    using Error::Error;
};

/// Input data contains NaN or infinity where finite values are required.
class NonFiniteValue : public Error {
public:
    using Error::Error;
};

/// Missing or unusable sequence data on disk.
class DataError : public Error {
public:
    using Error::Error;
};

/// The ADMM solver produced non-finite values.
class Diverged : public Error {
public:
    Diverged(int iteration, const std::string& what)
        : Error("solver diverged at iteration " + std::to_string(iteration) + ": " + what),
          iteration_(iteration) {}

    int iteration() const noexcept { return iteration_; }

private:
    int iteration_;
};

/// The search window no longer overlaps the frame.
class LostTarget : public Error {
public:
    using Error::Error;
};

}  // namespace cftrack
