#pragma once

#include <stdexcept>
#include <string>

namespace parity_cal {

// Base for every error the library raises.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input violates a documented invariant (bad sigma, empty set, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

// Malformed file content. Carries the 1-based line number when known.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class UnsupportedVariantError : public Error {
public:
    using Error::Error;
};

class NumericError : public Error {
public:
    using Error::Error;
};

// A score that has no value on the given input (AUROC with one class).
class UndefinedScoreError : public Error {
public:
    using Error::Error;
};

}  // namespace parity_cal
