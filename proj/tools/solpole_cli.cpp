#include <iostream>

#include "solpole/cli.hpp"

int main(int argc, char** argv) { return solpole::cli::run(argc, argv, std::cout, std::cerr); }
