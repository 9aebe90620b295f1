#include <string>
#include <vector>

#include "sten/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return sten::cli::run(args);
}
