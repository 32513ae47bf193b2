#pragma once

#include <stdexcept>
#include <string>

namespace qgcc {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class StructureViolation : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class NotHermitian : public Error {
public:
    using Error::Error;
};

/// A drift matrix has an eigenvalue with real part >= the Hurwitz margin.
class NotHurwitz : public Error {
public:
    using Error::Error;
};

/// A scalar or matrix parameter that must be positive is not (kappa, R, gamma, ...).
class NonPositiveParameter : public Error {
public:
    using Error::Error;
};

/// The method requested does not match the uncertainty class of the system.
class ClassMismatch : public Error {
public:
    using Error::Error;
};

class NumericalFailure : public Error {
public:
    using Error::Error;
};

class IllConditioned : public Error {
public:
    using Error::Error;
};

class SingularSqueezer : public Error {
public:
    using Error::Error;
};

class Unrealizable : public Error {
public:
    using Error::Error;
};

/// Raised when the controller is zero, so no squeezer is needed (or possible).
class NoControllerNeeded : public Error {
public:
    using Error::Error;
};

class Unsupported : public Error {
public:
    using Error::Error;
};

}  // namespace qgcc
