#include "floqem/cli.hpp"

int main(int argc, char** argv) {
  return floqem::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
