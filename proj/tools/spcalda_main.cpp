#include "spcalda/cli.hpp"

int main(int argc, char** argv) { return spcalda::cli_main(argc, argv); }
