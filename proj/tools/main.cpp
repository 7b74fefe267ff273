#include "svt/cli.hpp"

int main(int argc, char** argv) { return svt::cli_main(argc, argv); }
