#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace forecast::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kIo = 2,
  kMissingDependency = 3,
  kBadSelector = 4,
};

// A required earlier stage has not been run.
class MissingDependency : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unknown instance id or an empty selection.
class BadSelector : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Runs the command line (args[0] is the program name) and returns the exit
// code. Diagnostics go to stderr, progress to stdout.
int run(const std::vector<std::string>& args);

}  // namespace forecast::cli
