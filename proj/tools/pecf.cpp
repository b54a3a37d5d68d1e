#include "pecf/cli.hpp"

int main(int argc, char** argv) {
    return pecf::cli::run_cli({argv + 1, argv + argc});
}
