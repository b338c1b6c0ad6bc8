#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wcl {

// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class CapabilityError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// A dataset or checkpoint record could not be parsed. Carries the 1-based
/// line number and the offending field name (empty when the whole line is bad).
class FormatError : public Error {
public:
    FormatError(std::size_t line, std::string field, const std::string& what)
        : Error("line " + std::to_string(line) + (field.empty() ? "" : ", field '" + field + "'") +
                ": " + what),
          line_(line),
          field_(std::move(field)) {}

    std::size_t line() const noexcept { return line_; }
    const std::string& field() const noexcept { return field_; }

private:
    std::size_t line_;
    std::string field_;
};

/// Records parse fine but disagree with the file header (e.g. wrong K).
class SchemaError : public FormatError {
public:
    using FormatError::FormatError;
};

class MissingLabelError : public Error {
public:
    using Error::Error;
};

/// rbar <= 0 on a sample that needs the WMMSE ratio weighting.
class DegenerateSampleError : public Error {
public:
    using Error::Error;
};

/// The SCSC tracking variable dropped below its floor.
class TrackingCollapseError : public Error {
public:
    TrackingCollapseError(long long step, double y)
        : Error("tracking variable collapsed at step " + std::to_string(step) +
                " (y = " + std::to_string(y) + ")"),
          step_(step),
          y_(y) {}

    long long step() const noexcept { return step_; }
    double y() const noexcept { return y_; }

private:
    long long step_;
    double y_;
};

class DivergenceError : public Error {
public:
    using Error::Error;
};

}  // namespace wcl
