#include <string>
#include <vector>

#include "apsk/harness.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return apsk::harness::run_cli(args);
}
