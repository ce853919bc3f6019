#include <iostream>

#include "svarspec/cli.hpp"

int main(int argc, char** argv) { return svarspec::run_cli(argc, argv, std::cout, std::cerr); }
