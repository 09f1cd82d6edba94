// SPDX-License-Identifier: Apache-2.0
#include <iostream>

#include "ptest/cli.hpp"

int main(int argc, char** argv) { return ptest::run_cli(argc, argv, std::cout, std::cerr); }
