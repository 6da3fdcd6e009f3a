#include <iostream>

#include "isac/commands.hpp"

int main(int argc, char** argv) { return isac::run_cli(argc, argv, std::cout, std::cerr); }
