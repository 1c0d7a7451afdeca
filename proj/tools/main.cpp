#include <iostream>

#include "geosid/cli.hpp"

int main(int argc, char** argv) { return geosid::run_cli(argc, argv, std::cout, std::cerr); }
