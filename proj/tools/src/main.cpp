#include <iostream>

#include "covstein/cli.hpp"

int main(int argc, char** argv) {
  return covstein::cli::run(argc, argv, std::cout, std::cerr);
}
