// SPDX-License-Identifier: Apache-2.0
#include <string>
#include <vector>

#include "gsc/cli.hpp"

int main(int argc, char** argv) {
  return gsc::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
