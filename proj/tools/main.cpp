#include <iostream>

#include "typescore/cli.hpp"

int main(int argc, char** argv) { return typescore::cli::dispatch(argc, argv, std::cout, std::cerr); }
