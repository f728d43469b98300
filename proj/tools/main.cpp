#include "gslope/cli.hpp"

int main(int argc, char** argv) { return gslope::run_cli(argc, argv); }
