#include "betti_heights/cli.hpp"

int main(int argc, char** argv) { return bh::cli::run(argc, argv); }
