#pragma once

#include <stdexcept>
#include <string>

namespace relaxometer {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class InvalidDimension : public Error {
  public:
    using Error::Error;
};

class ConfigurationError : public Error {
  public:
    using Error::Error;
};

class PartitionError : public Error {
  public:
    using Error::Error;
};

/// The supplied involution does not commute with the operator.
class NotASymmetry : public Error {
  public:
    using Error::Error;
};

/// A computed quantity failed an internal consistency check (imaginary
/// residue, eigen-residual, non-unitarity, ...).
class NumericalConsistency : public Error {
  public:
    using Error::Error;
};

class ResourceLimit : public Error {
  public:
    using Error::Error;
};

class DomainError : public Error {
  public:
    using Error::Error;
};

class InsufficientData : public Error {
  public:
    using Error::Error;
};

} // namespace relaxometer
