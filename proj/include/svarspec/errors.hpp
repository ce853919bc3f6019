#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace svarspec {

// Base for every error the library throws on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PoleError : public Error {
 public:
  PoleError(std::complex<double> point, const std::string& what)
      : Error(what), point_(point) {}
  std::complex<double> point() const { return point_; }

 private:
  std::complex<double> point_;
};

class DivisionByZeroError : public Error {
 public:
  using Error::Error;
};

class LabelError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Raised when an exact elimination meets a singular system. Under random
/// parameter sampling this signals a non-generic draw.
class SingularMatrixError : public Error {
 public:
  using Error::Error;
};

class GraphError : public Error {
 public:
  using Error::Error;
};

class CyclicGraphError : public GraphError {
 public:
  using GraphError::GraphError;
};

class ParamError : public Error {
 public:
  using Error::Error;
};

class IdentificationError : public Error {
 public:
  using Error::Error;
};

class EstimationError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace svarspec
