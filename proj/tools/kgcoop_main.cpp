#include <iostream>

#include "kgcoop/cli.hpp"

int main(int argc, char** argv) { return kgcoop::run_cli(argc, argv, std::cout, std::cerr); }
