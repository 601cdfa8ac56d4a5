#include "cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return expconv::cli::run_cli(argc, argv, std::cout, std::cerr); }
