#include <iostream>

#include "rct/cli/commands.hpp"

int main(int argc, char** argv) { return rct::cli::run(argc, argv, {std::cout, std::cerr}); }
