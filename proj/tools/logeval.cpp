#include <iostream>
#include <string>
#include <vector>

#include "logeval/pipeline.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return logeval::pipeline::run_cli(args, std::cout, std::cerr);
}
