#include <iostream>

#include "corrhist/cli.hpp"

int main(int argc, char** argv) { return corrhist::cli::run(argc, argv, std::cout, std::cerr); }
