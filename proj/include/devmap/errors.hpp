#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace devmap {

// Malformed expression or config text. `offset` is the 1-based byte position
// of the offending character (length + 1 when input ended too early).
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& message, std::size_t offset)
        : std::runtime_error(message + " (offset " + std::to_string(offset) + ")"),
          offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

// Structurally invalid inputs: dimension mismatches, missing config keys,
// seed matrices that fail their isometry checks, bad flags.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Numeric failure during evaluation: non-finite values, points outside the
// chart domain, metrics that stop being positive definite.
class EvalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Numeric failure during integration: step underflow, frame drift beyond
// tolerance, non-finite right-hand sides.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace devmap
