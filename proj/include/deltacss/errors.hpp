#pragma once

#include <stdexcept>
#include <string>

namespace deltacss {

/// Root of every exception raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed numeric input: non-finite entries, length mismatches.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Design parameters violate a validity inequality.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// A configuration expected on the variety is not (pose extraction, classification).
class ConsistencyError : public Error {
 public:
  explicit ConsistencyError(const std::string& what, double worst = 0.0)
      : Error(what), worst_residual(worst) {}
  double worst_residual;
};

/// A catalog point failed the residual check.
class NotOnVarietyError : public ConsistencyError {
 public:
  using ConsistencyError::ConsistencyError;
};

/// Two spheres or circles do not meet.
class EmptyIntersectionError : public Error {
 public:
  using Error::Error;
};

/// Intersection is tangential or fills a whole circle; no isolated branch exists.
class DegenerateIntersectionError : public Error {
 public:
  using Error::Error;
};

/// A removable singularity could not be continued (vanishing derivative).
class ContinuationError : public Error {
 public:
  using Error::Error;
};

/// A geometric precondition (perpendicularity, coincidence) does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// The fitted constraint-mixing matrix does not explain the transformed constraints.
class InvarianceError : public Error {
 public:
  using Error::Error;
};

/// Verification of a catalog point or the full catalog failed.
class CatalogError : public Error {
 public:
  using Error::Error;
};

/// Witness construction is not available (excluded parameters, no coincidence).
class CertificateUnavailableError : public Error {
 public:
  using Error::Error;
};

/// A witness path left the variety.
class PathInvalidError : public Error {
 public:
  using Error::Error;
};

/// Tangent span too small to certify a non-manifold point.
class CertificateFailureError : public Error {
 public:
  using Error::Error;
};

/// Domain violation for the curve example.
class DomainError : public Error {
 public:
  using Error::Error;
};

}  // namespace deltacss
