#pragma once

#include <stdexcept>
#include <string>

namespace grove {

// A request or argument that violates a documented invariant.
class RejectedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Lookup of an id or name that the callee does not know.
class NotFoundError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Backend refused a launch because a configured limit is reached. Distinct
// from RejectedError so callers can tell "bad request" from "try later".
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The host environment is unusable (storage root missing, bind failed, ...).
class EnvironmentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace grove
