#include "colrisk/cli.hpp"

int main(int argc, char** argv) { return colrisk::run_cli(argc, argv); }
