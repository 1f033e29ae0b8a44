#include <iostream>
#include <string>
#include <vector>

#include "tmap_cli/cli.hpp"

int main(int argc, char** argv) {
  return tmap::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
