#include "desn/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return desn::cli::run(argc, argv, std::cout, std::cerr); }
