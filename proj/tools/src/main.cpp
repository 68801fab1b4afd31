#include <iostream>

#include "demoforge_cli/cli.hpp"

int main(int argc, char** argv) { return demoforge::cli::run(argc, argv, std::cout, std::cerr); }
