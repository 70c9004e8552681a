#pragma once

#include <stdexcept>
#include <string>

namespace mlpcv {

// Base class for all recoverable library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// geometry
class TooFewVertices : public Error {
 public:
  using Error::Error;
};
class NonConvexInput : public Error {
 public:
  using Error::Error;
};
class DegenerateLine : public Error {
 public:
  using Error::Error;
};
class MaskOverflow : public Error {
 public:
  using Error::Error;
};
class OuterFaceQuery : public Error {
 public:
  using Error::Error;
};

// mlp / integrator
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};
class LayerBudgetExceeded : public Error {
 public:
  using Error::Error;
};
class SchemaError : public Error {
 public:
  using Error::Error;
};
class UnsupportedActivation : public Error {
 public:
  using Error::Error;
};
class NonFiniteLoss : public Error {
 public:
  using Error::Error;
};

// benchmarks
class UnknownFunction : public Error {
 public:
  using Error::Error;
};

}  // namespace mlpcv
