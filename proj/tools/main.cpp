#include <iostream>

#include "v2v/cli.hpp"

int main(int argc, char** argv) { return v2v::run_cli(argc, argv, std::cout, std::cerr); }
