#include <iostream>

#include "emsrl/cli.hpp"

int main(int argc, char** argv) { return emsrl::cli::run(argc, argv, std::cout, std::cerr); }
