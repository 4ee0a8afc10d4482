#include <iostream>
#include <string>
#include <vector>

#include "tauber/cli.hpp"

int main(int argc, char** argv) {
    return tauber::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
