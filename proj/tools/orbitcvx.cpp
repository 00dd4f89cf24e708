#include "orbitcvx/cli.hpp"

int main(int argc, char** argv) { return orbitcvx::cli::run(argc, argv); }
