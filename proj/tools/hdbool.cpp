#include <iostream>

#include "hdbool/cli.hpp"

int main(int argc, char** argv) {
  return hdbool::cli::run_cli(argc, argv, std::cout, std::cerr);
}
