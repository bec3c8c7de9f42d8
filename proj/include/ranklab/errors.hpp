#pragma once

#include <stdexcept>
#include <string>

namespace ranklab {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A scale, shape or count parameter outside its valid domain.
class ParameterDomainError : public Error {
 public:
  using Error::Error;
};

// The operation is not defined for this variant (e.g. sampling an improper prior).
class UnsupportedOperation : public Error {
 public:
  using Error::Error;
};

class VarianceUndefined : public Error {
 public:
  using Error::Error;
};

class IntegrationFailure : public Error {
 public:
  using Error::Error;
};

// Prior and likelihood put no joint mass anywhere we can find it.
class DegeneratePosterior : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class SizeLimitError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class FileError : public Error {
 public:
  using Error::Error;
};

}  // namespace ranklab
