#include "parity_cal/cli.hpp"

int main(int argc, char** argv) { return parity_cal::cli::cli_run(argc, argv); }
