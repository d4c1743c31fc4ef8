#pragma once

#include <stdexcept>
#include <string>

namespace qmep {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Shapes or indices that do not line up (dimension mismatch, bad factor index).
class DimensionError : public Error {
public:
    using Error::Error;
};

// A numerical invariant of a domain type or operation precondition failed
// (non-Hermitian input, non-idempotent projector, incompatible observations...).
class InvariantError : public Error {
public:
    using Error::Error;
};

// Malformed or inconsistent experiment configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

// File could not be read or written.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace qmep
