#include <string>
#include <vector>

#include "forecast/cli/commands.hpp"

int main(int argc, char** argv) {
  return forecast::cli::run(std::vector<std::string>(argv, argv + argc));
}
