#include <iostream>

#include "dspg/cli.hpp"

int main(int argc, char** argv) { return dspg::run_cli(argc, argv, std::cout, std::cerr); }
