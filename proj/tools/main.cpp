#include <iostream>

#include "cli/runner.hpp"

int main(int argc, char** argv) { return ltvcli::cli_main(argc, argv, std::cout, std::cerr); }
