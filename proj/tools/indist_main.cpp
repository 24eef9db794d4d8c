#include "indist/cli.hpp"

int main(int argc, char** argv) { return indist::cli_dispatch(argc, argv); }
