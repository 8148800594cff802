#pragma once

#include <stdexcept>
#include <string>

namespace dtwar {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file or text (CSV rows, path strings, checkpoints).
class ParseError : public Error {
public:
    using Error::Error;
};

/// Shapes of two operands disagree (channels, lengths, grid sizes).
class ShapeError : public Error {
public:
    using Error::Error;
};

/// A configuration value violates its documented invariant.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace dtwar
