#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace yauyau {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ParseErrorKind { Syntax, UnknownVariable, UnknownFunction, Arity };

// Raised by the expression parser. `offset` is the byte offset into the input
// where the problem was detected.
class ParseError : public Error {
public:
    ParseError(ParseErrorKind kind, std::size_t offset, const std::string& message)
        : Error(message + " at offset " + std::to_string(offset)), kind_(kind), offset_(offset),
          detail_(message) {}

    ParseErrorKind kind() const noexcept { return kind_; }
    std::size_t offset() const noexcept { return offset_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    ParseErrorKind kind_;
    std::size_t offset_;
    std::string detail_;
};

// A configuration value is outside its admissible range.
class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& message)
        : Error(field + ": " + message), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

// Grid would exceed the node budget.
class CapacityError : public Error {
public:
    using Error::Error;
};

// A drift, observation or field value became NaN/inf.
class NonFiniteError : public Error {
public:
    NonFiniteError(const std::string& message, std::size_t index)
        : Error(message), index_(index) {}
    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

// Discrete posterior mass underflowed to zero (or went nonpositive).
class DensityCollapse : public Error {
public:
    DensityCollapse(const std::string& message, std::size_t observation_index)
        : Error(message), observation_index_(observation_index) {}
    std::size_t observation_index() const noexcept { return observation_index_; }

private:
    std::size_t observation_index_;
};

class Cancelled : public Error {
public:
    Cancelled() : Error("cancelled") {}
};

} // namespace yauyau
