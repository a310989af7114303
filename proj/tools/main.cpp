#include <iostream>
#include <string>
#include <vector>

#include "thread5d/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return thread5d::cli::run(std::move(args), std::cout, std::cerr);
}
