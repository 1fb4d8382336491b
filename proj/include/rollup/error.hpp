#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rollup {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Structural problems in delimited input (ragged rows, unterminated quotes).
class CsvError : public Error {
public:
    using Error::Error;
};

/// Unknown or duplicate columns, invalid column names, name collisions.
class SchemaError : public Error {
public:
    using Error::Error;
};

/// Invalid collapsing schemes: child-parent violations, non-functional
/// coarsenings, missing labels.
class SchemeError : public Error {
public:
    using Error::Error;
};

/// Out-of-range row index in a subset request.
class BoundsError : public Error {
public:
    using Error::Error;
};

/// Syntax or type error in one of the DSLs. Carries the byte offset of the
/// offending token within the input text.
class ParseError : public Error {
public:
    ParseError(const std::string& message, std::size_t offset)
        : Error(message + " (at offset " + std::to_string(offset) + ")"),
          offset_(offset) {}

    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

/// A quality predicate returned Indeterminate or Error during an engine run.
class PredicateError : public Error {
public:
    PredicateError(const std::string& message, std::string label, std::size_t level)
        : Error(message), label_(std::move(label)), level_(level) {}

    const std::string& label() const { return label_; }
    std::size_t level() const { return level_; }

private:
    std::string label_;
    std::size_t level_;
};

}  // namespace rollup
