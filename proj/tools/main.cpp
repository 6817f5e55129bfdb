#include <iostream>
#include <string>
#include <vector>

#include "trbac/tooling/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return trbac::tooling::cli_dispatch(args, std::cout, std::cerr);
}
