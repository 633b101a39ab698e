// SPDX-License-Identifier: Apache-2.0
//
// Exception types shared across the library, mapped to CLI exit codes.

#pragma once

#include <stdexcept>
#include <string>

namespace fdx {

// Invalid user-supplied configuration or parameter value (CLI exit code 3).
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Numerically singular or ill-conditioned linear system (CLI exit code 5).
class SingularityError : public std::runtime_error {
 public:
  explicit SingularityError(const std::string& what) : std::runtime_error(what) {}
};

// File or stream failure (CLI exit code 4).
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Internal API misuse: dimension mismatches, broken preconditions between
// modules. Never triggered by user input.
class ContractError : public std::logic_error {
 public:
  explicit ContractError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace fdx
