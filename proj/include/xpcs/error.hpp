#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace xpcs {

/// Base class of every error raised by the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Malformed trajectory or data file. Carries the 1-based line number when known.
class ParseError : public Error
{
public:
    ParseError(std::string const& what, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what)
      , line_(line)
    {}

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// Triclinic or otherwise non-cubic simulation cell.
class UnsupportedGeometry : public Error
{
public:
    using Error::Error;
};

/// Precondition violated by a caller-supplied argument.
class ArgumentError : public Error
{
public:
    using Error::Error;
};

/// A wavevector that does not lie on the reciprocal lattice of the box.
class LatticeError : public Error
{
public:
    using Error::Error;
};

/// A q-ring with no member grid points.
class EmptyRingError : public Error
{
public:
    using Error::Error;
};

/// Fields or series defined on incompatible grids.
class GridMismatch : public Error
{
public:
    using Error::Error;
};

/// Not enough samples for the requested estimate.
class InsufficientData : public Error
{
public:
    using Error::Error;
};

/// Invalid pipeline configuration.
class ConfigError : public Error
{
public:
    using Error::Error;
};

/// File system or stream failure.
class IoError : public Error
{
public:
    using Error::Error;
};

} // namespace xpcs
