#include "hpcal/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return hpcal::cli::run(argc, argv, std::cout, std::cerr); }
