#include <iostream>
#include <string>
#include <vector>

#include "ultra/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return ultra::cli::dispatch(args, std::cout, std::cerr);
}
