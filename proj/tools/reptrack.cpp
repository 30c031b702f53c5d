#include "reptrack/cli.hpp"

int main(int argc, char** argv) { return reptrack::run_cli(argc, argv); }
