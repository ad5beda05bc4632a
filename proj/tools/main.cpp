#include "sgdiff/cli.hpp"

int main(int argc, char** argv) { return sgdiff::cli::run_cli(argc, argv); }
