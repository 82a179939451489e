#include <iostream>

#include "aware_ground/cli.hpp"

int main(int argc, char** argv) {
  return aware_ground::cli::run_cli(argc, argv, std::cout, std::cerr);
}
