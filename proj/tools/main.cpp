#include <iostream>

#include "tiltwing/cli.hpp"

int main(int argc, char** argv) {
    return tiltwing::cli_run(std::vector<std::string>(argv + 1, argv + argc), std::cout,
                             std::cerr);
}
