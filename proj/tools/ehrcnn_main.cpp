#include <string>
#include <vector>

#include "ehr/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return ehr::run_cli(std::move(args));
}
