#include "hiermetric/cli.hpp"

int main(int argc, char** argv) { return hiermetric::cli::run_command(argc, argv); }
