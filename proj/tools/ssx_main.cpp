#include "ssx/cli.hpp"

int main(int argc, char** argv) { return ssx::cli_dispatch(argc, argv); }
