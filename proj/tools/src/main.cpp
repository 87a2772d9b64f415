#include <iostream>

#include "tfcli/tfcli.hpp"

int main(int argc, char** argv) { return tfcli::run(argc, argv, std::cout, std::cerr); }
