#include <iostream>

#include "qlim/cli.hpp"

int main(int argc, char** argv) { return qlim::run_cli(argc, argv, std::cout, std::cerr); }
