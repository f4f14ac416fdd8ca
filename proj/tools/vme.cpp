#include "vme/cli.hpp"

int main(int argc, char** argv) { return vme::cli::run_main(argc, argv); }
