#include "pathlangevin/cli/app.hpp"

#include <iostream>

int main(int argc, char** argv) {
  return pathlangevin::cli::run(argc, argv, std::cout, std::cerr);
}
