#include <iostream>

#include "fnrd/cli.hpp"

int main(int argc, char** argv) { return fnrd::run_cli(argc, argv, std::cout, std::cerr); }
