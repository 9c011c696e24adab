#pragma once

#include <stdexcept>
#include <string>

namespace frontlab {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class PreconditionError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class DependencyError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

// Numerical failures: solver stagnation, constant derivation, extraction and fitting.
class NumericalError : public Error {
public:
    using Error::Error;
};

class DerivationError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class ExtractionError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class FitError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace frontlab
