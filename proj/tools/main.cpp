#include <iostream>

#include "lipbesov/commands.hpp"

int main(int argc, char** argv) { return lipbesov::run_cli(argc, argv, std::cout, std::cerr); }
