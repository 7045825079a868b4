#include "rulebench/cli.hpp"

int main(int argc, char** argv) { return rulebench::run_cli(argc, argv); }
