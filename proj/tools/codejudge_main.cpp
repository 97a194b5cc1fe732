#include "codejudge/cli.hpp"

int main(int argc, char** argv) {
    return codejudge::run_cli(argc, argv);
}
