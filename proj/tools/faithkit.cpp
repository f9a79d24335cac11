#include <string>
#include <vector>

#include "faithkit/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return faithkit::dispatch(args);
}
