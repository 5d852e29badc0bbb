#include <iostream>

#include "stochlab/run.hpp"

int main(int argc, char** argv) {
  return stochlab::cli_main(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
