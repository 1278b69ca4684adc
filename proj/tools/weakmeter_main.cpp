#include <iostream>
#include <string>
#include <vector>

#include "weakmeter/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return weakmeter::run_cli(args, std::cout, std::cerr);
}
