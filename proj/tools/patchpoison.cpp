#include <iostream>

#include "patchpoison/cli.hpp"

int main(int argc, char** argv) { return patchpoison::run_cli(argc, argv, std::cout, std::cerr); }
