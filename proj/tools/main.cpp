#include "rlab/cli.hpp"

int main(int argc, char** argv) { return rlab::run_cli(argc, argv); }
