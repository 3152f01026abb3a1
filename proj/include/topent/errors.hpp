#pragma once

#include <stdexcept>
#include <string>

namespace topent {

// Base class for all toolkit errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidArgument : Error {
  using Error::Error;
};

// Map application requested at an index beyond the sequence horizon.
struct HorizonExceeded : Error {
  using Error::Error;
};

// Exact combinatorial search requested above the oracle size cap.
struct OracleTooLarge : Error {
  using Error::Error;
};

// Epsilon below the sample resolution guard.
struct ResolutionViolation : Error {
  using Error::Error;
};

struct NotATransitionMatrix : Error {
  using Error::Error;
};

struct CountOverflow : Error {
  using Error::Error;
};

struct ConvergenceFailure : Error {
  using Error::Error;
};

// Orbit left the partition while building an itinerary.
struct OrbitEscape : Error {
  OrbitEscape(const std::string& what, long step) : Error(what), escape_step(step) {}
  long escape_step;
};

struct NoSingletonGuarantee : Error {
  using Error::Error;
};

struct NoBound : Error {
  using Error::Error;
};

// A point of the target set lies in no cover element.
struct UncoveredPoint : Error {
  using Error::Error;
};

// Operation needs monotone-branch data the sequence cannot provide.
struct UnsupportedMap : Error {
  using Error::Error;
};

}  // namespace topent
