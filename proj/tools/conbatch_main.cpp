#include "conbatch/cli.hpp"

int main(int argc, char** argv) { return conbatch::run_cli(argc, argv); }
