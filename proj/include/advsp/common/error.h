#pragma once

#include <stdexcept>
#include <string>

namespace advsp {

// Root of every exception thrown by the harness. Modules derive their own
// types so callers can tell a malformed dataset from an unreachable endpoint.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid or unreadable configuration (CLI exit code 1).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// File could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace advsp
