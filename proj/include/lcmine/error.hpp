#pragma once

#include <stdexcept>
#include <string>

namespace lcmine {

/// Error category used to map failures onto CLI exit behavior and to let
/// callers distinguish bad input files from bad parameters.
enum class ErrorKind {
  schema,        // missing/unresolvable column, malformed header
  parse,         // unreadable cell or config value
  integrity,     // data violates a structural invariant (ordering, ids)
  parameter,     // argument outside its documented range
  precondition,  // operation called on unsuitable data
  geometry,      // physically impossible configuration (overlapping vehicles)
  range,         // time/index outside the available span
  io,            // file system failure
  numeric        // non-finite value where a finite one is required
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace lcmine
