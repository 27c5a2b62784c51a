#pragma once

#include <ostream>

namespace netobs::cli {

enum ExitCode : int {
  kOk = 0,
  kInputError = 1,   // I/O or parse failure
  kUnobservable = 2,  // network fails the observability assumption
  kSolverFailure = 3,
  kValidationFailure = 4,
};

// Entry point shared by the executable and the tests. Payload goes to `out`,
// diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace netobs::cli
