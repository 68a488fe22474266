#include <iostream>

#include "streamsift/cli.hpp"

int main(int argc, char** argv) { return streamsift::cli::main(argc, argv, std::cout, std::cerr); }
