#include "topomlp/commands.hpp"

int main(int argc, char** argv) { return topomlp::cli::main(argc, argv); }
