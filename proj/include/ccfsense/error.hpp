#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ccfsense {

/// Base of all errors thrown by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad or inconsistent input: unknown config keys, wrong units, missing fields.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Input that is well-formed but physically meaningless.
class PhysicsError : public Error {
public:
    using Error::Error;
};

/// Time-series file problems. Carries the 1-based line number.
class ParseError : public Error {
public:
    enum class Kind { MalformedHeader, UnitMismatch, NonMonotoneTime, BadField, Truncated };

    ParseError(Kind kind, std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), kind_(kind), line_(line) {}

    Kind kind() const noexcept { return kind_; }
    std::size_t line() const noexcept { return line_; }

private:
    Kind kind_;
    std::size_t line_;
};

}  // namespace ccfsense
