#include "lpsi/cli.hpp"

int main(int argc, char** argv) { return lpsi::run_cli(argc, argv); }
