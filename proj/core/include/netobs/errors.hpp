#pragma once

#include <stdexcept>
#include <string>

namespace netobs {

// Malformed input: bad dimensions, indices, masks, files.
class InvalidInput : public std::runtime_error {
 public:
  explicit InvalidInput(const std::string& what) : std::runtime_error(what) {}
};

// The pair (A, C_O) fails the observability check.
class Unobservable : public std::runtime_error {
 public:
  explicit Unobservable(const std::string& what) : std::runtime_error(what) {}
};

class SolverFailure : public std::runtime_error {
 public:
  explicit SolverFailure(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace netobs
