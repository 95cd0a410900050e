#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace filo {

/// Input could not be decoded (malformed line, bad field, bad CSV cell).
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& msg, std::size_t line = 0)
        : std::runtime_error(line ? "line " + std::to_string(line) + ": " + msg : msg),
          line_(line) {}

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// Decoded input violates a structural contract (seq order, stack roots, empty block set).
class StructureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller passed an out-of-contract parameter (k1+k2 != 1, empty prefix list, ...).
class ParameterError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace filo
