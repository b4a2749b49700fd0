#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tat {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Malformed, truncated or inconsistent file.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Time stepping produced non-finite values.
class InstabilityError : public Error {
 public:
  InstabilityError(const std::string& what, std::size_t step)
      : Error(what + " (step " + std::to_string(step) + ")"), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// An iterative or direct solver failed to reach its tolerance.
class SolverError : public Error {
 public:
  using Error::Error;
};

}  // namespace tat
