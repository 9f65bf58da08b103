#include <iostream>

#include "autothink/cli.hpp"

int main(int argc, char** argv) {
  return autothink::cli_main(argc, argv, std::cout, std::cerr);
}
