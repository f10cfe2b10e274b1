#pragma once

#include <stdexcept>
#include <string>

namespace holder {

/// Base of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Time or argument outside the model's domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Invalid parameter values (eps outside (0, H), p = 0, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// The operation is not available for this model, kernel or grid.
class CapabilityError : public Error {
 public:
  using Error::Error;
};

class QuadratureError : public Error {
 public:
  using Error::Error;
};

/// Values that should agree analytically disagree beyond round-off.
class NumericalConsistencyError : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

class NotPositiveDefiniteError : public Error {
 public:
  using Error::Error;
};

class EmbeddingError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace holder
