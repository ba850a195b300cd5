#include "cog/cli.hpp"

int main(int argc, char** argv) { return cog::cli_main(argc, argv); }
