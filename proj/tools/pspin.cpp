#include <iostream>

#include "pspin/cli.hpp"

int main(int argc, char** argv) { return pspin::run_cli(argc, argv, std::cout, std::cerr); }
