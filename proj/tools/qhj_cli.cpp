#include <iostream>
#include <string>
#include <vector>

#include "qhj/cli.hpp"

int main(int argc, char** argv) {
    const std::vector<std::string> args(argv + 1, argv + argc);
    return qhj::run_cli(args, std::cout, std::cerr);
}
