#include <iostream>

#include "liquid/cli.hpp"

int main(int argc, char** argv) { return liquid::cli::run(argc, argv, std::cout, std::cerr); }
