// SPDX-License-Identifier: Apache-2.0
#include <iostream>

#include "hrseq/cli.hpp"

int main(int argc, char** argv) { return hrseq::cli::run(argc, argv, std::cout, std::cerr); }
