#include "morphco/cli/commands.hpp"

int main(int argc, char** argv) { return morphco::cli::run_cli(argc, argv); }
