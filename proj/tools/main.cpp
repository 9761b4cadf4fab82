#include <iostream>

#include "bifeedback/cli.hpp"

int main(int argc, char** argv) { return bifeedback::cli::main(argc, argv, std::cout, std::cerr); }
