#include <string>
#include <vector>

#include "mcfse/cli.hpp"

int main(int argc, char** argv) {
    return mcfse::cli::run(std::vector<std::string>(argv + 1, argv + argc));
}
