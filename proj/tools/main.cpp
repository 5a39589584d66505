#include <iostream>

#include "oogrisk/cli.hpp"

int main(int argc, char** argv) { return oogrisk::cli::run(argc, argv, std::cout, std::cerr); }
