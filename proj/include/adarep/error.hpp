#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace adarep {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid argument, configuration, or schedule.
class ValidationError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// Authenticated-data-structure check failed: the storage provider handed over
/// a proof or record that does not match the trusted digest.
class IntegrityViolation : public Error {
public:
    using Error::Error;
};

/// Internal simulator invariant broken.
class SimulationError : public Error {
public:
    using Error::Error;
};

}  // namespace adarep
