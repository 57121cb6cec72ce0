#include <vector>

#include "qmeas/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return qmeas::cli_main(args);
}
