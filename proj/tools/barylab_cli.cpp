#include "barylab/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return barylab::cli::run(argc, argv, std::cout, std::cerr); }
