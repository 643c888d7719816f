#include <iostream>

#include "qmlsel/cli.hpp"

int main(int argc, char** argv) { return qmlsel::run_cli(argc, argv, std::cout, std::cerr); }
