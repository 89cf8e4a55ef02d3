#include <string>
#include <vector>

#include "mica/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return mica::cli::run(args);
}
