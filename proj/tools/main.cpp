#include <iostream>

#include "tfa/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return tfa::cli::dispatch(args, std::cout, std::cerr);
}
