#include "pathode/commands.hpp"

#include <iostream>

int main(int argc, char** argv) { return pathode::run_cli(argc, argv, std::cout, std::cerr); }
