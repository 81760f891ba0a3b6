#pragma once

#include <stdexcept>
#include <string>

namespace ocs {

/// Base class for all toolkit errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Bad user input: missing files, malformed headers, shape mismatches.
/// The CLI maps these to exit code 2.
struct InputError : Error {
  using Error::Error;
};

/// Violated numeric precondition (nonpositive depth, angle out of range, ...).
struct DomainError : Error {
  using Error::Error;
};

}  // namespace ocs
