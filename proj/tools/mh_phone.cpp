#include <iostream>

#include "mhphone/cli.hpp"

int main(int argc, char** argv) {
  return mhphone::run_cli(argc, argv, std::cout, std::cerr);
}
