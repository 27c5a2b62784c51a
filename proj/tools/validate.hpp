#pragma once

#include <cstdint>
#include <ostream>

namespace netobs::cli {

struct ValidateOptions {
  std::uint64_t seed = 0;
  int pencil_cases = 60;
  int identity_cases = 10;
  int oracle_cases = 4;
  // Test hook: reconstruct with the sign variant the solver would reject.
  bool inject_sign_flip = false;
};

// Prints one line per check; returns the number of failed checks.
int run_validation(const ValidateOptions& opt, std::ostream& out);

}  // namespace netobs::cli
