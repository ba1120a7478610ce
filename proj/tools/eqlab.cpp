#include "eqlab/cli/commands.hpp"

int main(int argc, char** argv) { return eqlab::cli::run_cli(argc, argv); }
