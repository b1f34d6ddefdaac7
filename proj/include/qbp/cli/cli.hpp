#pragma once

#include <string>
#include <vector>

namespace qbp::cli {

// Entry point of the qbp binary. Returns the process exit code.
int run(int argc, char** argv);

struct FixtureResult {
  std::string module;
  std::string name;
  bool pass = false;
  double value = 0;  // the measured quantity (residual, eigenvalue, ...)
};

// Closed-form fixtures of every module plus the purification counterexample.
std::vector<FixtureResult> run_fixtures();

// Default working precision: $QBP_DIGITS when set and valid, else `fallback`.
int default_digits(int fallback);

}  // namespace qbp::cli
