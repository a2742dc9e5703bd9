#pragma once

#include <stdexcept>
#include <string>

namespace nmzi {

// Base of every error the library raises. The derived types map one-to-one
// onto the failure modes callers are expected to distinguish.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidConfiguration : public Error {
public:
    using Error::Error;
};

// A limit order that would cross the book or fall outside the grid.
class RejectedOrder : public Error {
public:
    using Error::Error;
};

// A market order arrived while the opposite side of the book was empty.
class LiquidityExhausted : public Error {
public:
    using Error::Error;
};

class InternalConsistency : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, long line)
        : Error(line > 0 ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}

    long line() const noexcept { return line_; }

private:
    long line_;
};

class EstimationDegenerate : public Error {
public:
    using Error::Error;
};

class FitFailed : public Error {
public:
    using Error::Error;
};

class NumericInstability : public Error {
public:
    using Error::Error;
};

} // namespace nmzi
