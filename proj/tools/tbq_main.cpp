#include <iostream>

#include "tbq/cli.hpp"

int main(int argc, char** argv) { return tbq::cli::run(argc, argv, std::cout, std::cerr); }
