#include <iostream>

#include "selchain/cli.hpp"

int main(int argc, char** argv) { return selchain::cli::run(argc, argv, std::cout, std::cerr); }
