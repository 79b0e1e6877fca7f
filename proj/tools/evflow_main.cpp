#include <iostream>

#include "evflow/cli/commands.hpp"

int main(int argc, char** argv) { return evflow::cli::run_cli(argc, argv, std::cout, std::cerr); }
