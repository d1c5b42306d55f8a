#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace opmode {

// Base class for every error thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& message) : std::runtime_error(message) {}
};

// Arguments outside the accepted domain: bad parameters, non-finite
// samples, mismatched dimensions.
class InvalidInput : public Error {
public:
    using Error::Error;
};

// Text input that does not match the expected layout. Carries the
// 1-based line number within the offending file.
class ParseError : public Error {
public:
    ParseError(const std::string& message, std::size_t line)
        : Error(message + " (line " + std::to_string(line) + ")"), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// Syntactically valid input whose values violate a domain rule
// (coordinate out of range, interval ending before it starts, ...).
class ValidationError : public Error {
public:
    ValidationError(const std::string& message, std::size_t line)
        : Error(message + " (line " + std::to_string(line) + ")"), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// A time series too short to admit even one window at the chosen
// embedding. Carries the offending (n, D, tau) triple.
class SeriesTooShort : public InvalidInput {
public:
    SeriesTooShort(std::size_t length, int dimension, int delay)
        : InvalidInput("series of length " + std::to_string(length) +
                       " is too short for dimension " + std::to_string(dimension) +
                       " and delay " + std::to_string(delay)),
          length_(length),
          dimension_(dimension),
          delay_(delay) {}

    std::size_t length() const noexcept { return length_; }
    int dimension() const noexcept { return dimension_; }
    int delay() const noexcept { return delay_; }

private:
    std::size_t length_;
    int dimension_;
    int delay_;
};

// A feature build where every trajectory was skipped.
class EmptyDatasetError : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

// An ordinal sequence with fewer than two patterns has no transitions.
class SequenceTooShort : public InvalidInput {
public:
    explicit SequenceTooShort(std::size_t length)
        : InvalidInput("ordinal sequence of length " + std::to_string(length) +
                       " has no transitions"),
          length_(length) {}

    std::size_t length() const noexcept { return length_; }

private:
    std::size_t length_;
};

}  // namespace opmode
