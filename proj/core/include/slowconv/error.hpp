#pragma once

#include <stdexcept>
#include <string>

namespace slowconv {

// Base for everything the library throws on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Two values bound to different ProbSpaces were combined.
class SpaceMismatch : public Error {
 public:
  SpaceMismatch() : Error("operands are bound to different probability spaces") {}
  explicit SpaceMismatch(const std::string& what) : Error(what) {}
};

// Violated precondition on an argument (bad weights, zero roof, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// The finite model is too small for the requested construction. The harness
// maps this to exit code 3 so the caller knows to enlarge the model.
class Infeasible : public Error {
 public:
  using Error::Error;
};

// Malformed or out-of-range experiment configuration (exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace slowconv
