#pragma once

#include <stdexcept>
#include <string>

namespace genco {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (bad bounds, empty input, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Malformed input file. Carries the 1-based line number when known.
class ParseError : public Error {
public:
    ParseError(const std::string& what, long line = 0)
        : Error(line > 0 ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}

    long line() const noexcept { return line_; }

private:
    long line_;
};

}  // namespace genco
