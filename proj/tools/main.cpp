#include <iostream>
#include <string>
#include <vector>

#include "cardiotox/cli.hpp"

int main(int argc, char** argv) {
    return cardiotox::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
