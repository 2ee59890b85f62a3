#include <iostream>
#include <string>
#include <vector>

#include "tokmerge/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return tokmerge::run_cli(args, std::cout, std::cerr);
}
