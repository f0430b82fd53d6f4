#include <iostream>

#include "mqlat/cli.hpp"

int main(int argc, char** argv) { return mqlat::cli::run(argc, argv, std::cout, std::cerr); }
