#include <iostream>

#include "dynpriv/cli.hpp"

int main(int argc, char** argv) { return dynpriv::run_cli(argc, argv, std::cout, std::cerr); }
