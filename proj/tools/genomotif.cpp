#include <iostream>

#include "genomotif/cli.hpp"

int main(int argc, char** argv) { return genomotif::cli::run(argc, argv, std::cout, std::cerr); }
