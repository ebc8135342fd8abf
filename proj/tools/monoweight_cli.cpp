#include "monoweight/cli.hpp"

int main(int argc, char** argv) { return monoweight::run_cli(argc, argv); }
