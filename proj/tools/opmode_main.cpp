#include "opmode/cli.hpp"

int main(int argc, char** argv) { return opmode::run_cli(argc, argv); }
