#include <mocsim/cli/cli.hpp>

#include <iostream>

int main(int argc, char** argv) { return mocsim::cli::main_entry(argc, argv, std::cout, std::cerr); }
