#include "ddcrp/cli.hpp"

int main(int argc, char** argv) { return ddcrp::run_cli(argc, argv); }
