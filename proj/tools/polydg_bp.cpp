#include "polydg/cli.hpp"

int main(int argc, char** argv) { return polydg::run_cli(argc, argv); }
