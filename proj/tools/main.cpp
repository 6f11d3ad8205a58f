#include <iostream>

#include "duallif/cli.hpp"

int main(int argc, char** argv) { return duallif::cli::run(argc, argv, std::cout, std::cerr); }
