#include "cli.hpp"

int main(int argc, char** argv) { return ptlattice::cli::run(argc, argv); }
