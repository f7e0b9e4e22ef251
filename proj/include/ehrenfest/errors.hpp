#pragma once

#include <stdexcept>
#include <string>

namespace ehrenfest {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Rhombus too large for the cell (rhombi would overlap or leave the hexagon).
class OverlapError : public Error {
public:
    using Error::Error;
};

class GeometryError : public Error {
public:
    using Error::Error;
};

/// Angle arguments outside the domain of the flight solution.
class DomainError : public Error {
public:
    using Error::Error;
};

class InfiniteTime : public Error {
public:
    using Error::Error;
};

/// A point within corner tolerance of a rhombus vertex.
class CornerHitError : public Error {
public:
    using Error::Error;
};

class SingularConfiguration : public Error {
public:
    using Error::Error;
};

class DegenerateTangent : public Error {
public:
    using Error::Error;
};

class NoSuchOrbit : public Error {
public:
    using Error::Error;
};

class SequenceMismatch : public Error {
public:
    SequenceMismatch(const std::string& what, std::string realized)
        : Error(what), realized_(std::move(realized)) {}

    /// Realized symbolic sequence, in the same text form as SymbolicSequence::to_string.
    const std::string& realized() const noexcept { return realized_; }

private:
    std::string realized_;
};

/// Invalid configuration value; `field` is the dotted path, e.g. "geometry.L".
class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& reason)
        : Error(field + ": " + reason), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

}  // namespace ehrenfest
