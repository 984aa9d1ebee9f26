#include <iostream>
#include <string>
#include <vector>

#include "qcap_cli/app.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return qcap::cli::run_cli(args, std::cout, std::cerr);
}
