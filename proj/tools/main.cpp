#include <string>
#include <vector>

#include "bitree/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return bitree::run_cli(args);
}
