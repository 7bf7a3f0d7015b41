#include <iostream>

#include "lsmd/cli.hpp"

int main(int argc, char** argv) { return lsmd::cli_main(argc, argv, std::cout, std::cerr); }
