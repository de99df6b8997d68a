#include <iostream>

#include "opramsey/cli.hpp"

int main(int argc, char** argv) {
  return opramsey::run_command(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
