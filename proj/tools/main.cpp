#include <iostream>

#include "tacnog/cli.hpp"

int main(int argc, char** argv) { return tacnog::run_command(argc, argv, std::cout, std::cerr); }
