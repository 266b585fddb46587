#include <iostream>

#include "acre/cli.hpp"

int main(int argc, char** argv) { return acre::cli::run(argc, argv, std::cout, std::cerr); }
