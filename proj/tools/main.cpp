#include <string>
#include <vector>

#include "marl/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return marl::run_command(args);
}
