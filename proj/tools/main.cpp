#include <vector>
#include <string>

#include "nsmc/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return nsmc::run_command(args);
}
