#include <string>
#include <vector>

#include "mcf/cli.hpp"

int main(int argc, char** argv) {
    return mcf::cli::dispatch(std::vector<std::string>(argv + 1, argv + argc));
}
