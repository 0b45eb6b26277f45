#include "gamma_elastica/cli.hpp"

int main(int argc, char** argv) {
  return gamma_elastica::cli::run(std::vector<std::string>(argv, argv + argc));
}
