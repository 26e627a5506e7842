#include "pcf/cli.hpp"

int main(int argc, char** argv) { return pcf::run_cli(argc, argv); }
