#include <iostream>
#include <string>
#include <vector>

#include "glht/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return glht::run_cli(args, std::cout, std::cerr);
}
