#pragma once

#include <stdexcept>
#include <string>

namespace climmap {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed climate file content. Carries the 1-based line number when known.
struct ParseError : Error {
    ParseError(std::size_t line, const std::string& reason)
        : Error("parse error at line " + std::to_string(line) + ": " + reason), line(line) {}
    explicit ParseError(const std::string& reason) : Error("parse error: " + reason), line(0) {}
    std::size_t line;
};

struct LengthError : Error {
    using Error::Error;
};

struct ArgumentError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

struct DimensionError : Error {
    using Error::Error;
};

struct NumericError : Error {
    using Error::Error;
};

struct SingularError : Error {
    using Error::Error;
};

// Non-finite state during simulation; step identifies the offending sample.
struct DivergenceError : Error {
    DivergenceError(std::size_t step, const std::string& what_arg)
        : Error(what_arg + " at step " + std::to_string(step)), step(step) {}
    std::size_t step;
};

// Invalid configuration; message names the offending field path.
struct ConfigError : Error {
    using Error::Error;
};

struct JoinError : Error {
    using Error::Error;
};

struct EmptyError : Error {
    using Error::Error;
};

} // namespace climmap
