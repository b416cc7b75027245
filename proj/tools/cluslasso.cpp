#include <iostream>

#include "cluslasso/cli.hpp"

int main(int argc, char** argv) { return cluslasso::run_cli(argc, argv, std::cout, std::cerr); }
