#pragma once

#include <stdexcept>
#include <string>

namespace dplr {

// Invalid user-supplied argument, configuration, or precondition violation.
class InvalidArgument : public std::runtime_error {
 public:
  explicit InvalidArgument(const std::string& what) : std::runtime_error(what) {}
};

// File-system or parse failure.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Input lies outside an operation's mathematical domain.
class DomainError : public std::runtime_error {
 public:
  explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dplr
