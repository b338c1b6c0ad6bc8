#include <iostream>

#include "wcl/commands.hpp"

int main(int argc, char** argv) { return wcl::run_cli(argc, argv, std::cout, std::cerr); }
