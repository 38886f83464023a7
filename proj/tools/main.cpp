#include <iostream>

#include "inertia/cli.hpp"

int main(int argc, char** argv) { return inertia::run_command(argc, argv, std::cout, std::cerr); }
