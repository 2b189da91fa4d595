#include <iostream>
#include <string>
#include <vector>

#include "pico/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return pico::cli_main(args, std::cout, std::cerr);
}
