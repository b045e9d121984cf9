#include <iostream>
#include <string>
#include <vector>

#include "udfp/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return udfp::cli::run(std::move(args), std::cout, std::cerr);
}
