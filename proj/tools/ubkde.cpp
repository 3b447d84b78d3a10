#include <iostream>

#include "ubkde/cli.hpp"

int main(int argc, char** argv) { return ubkde::run_cli(argc, argv, std::cout, std::cerr); }
