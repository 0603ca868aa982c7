#pragma once

#include <stdexcept>
#include <string>

namespace verbkit {

// Caller passed something malformed (bad id, missing field, empty input).
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A word or token is not present in the queried vocabulary.
class LookupError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input file; carries a 1-based line number when known.
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& msg, long line = -1)
        : std::runtime_error(line >= 0 ? msg + " (line " + std::to_string(line) + ")" : msg),
          line_(line) {}
    long line() const { return line_; }

private:
    long line_;
};

// Division by zero weight sums, non-finite values, zero-norm vectors.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Sequence-level contract violations: wrong MASK count, over-length input.
class StructuralError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Training diverged or the backend cannot train.
class TrainingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace verbkit
