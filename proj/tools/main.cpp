#include "cli.hpp"

#include <iostream>

int main(int argc, char **argv) { return chiralcmt::cli::cli_main(argc, argv, std::cout, std::cerr); }
