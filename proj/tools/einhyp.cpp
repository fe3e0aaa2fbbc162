#include "einhyp/cli.hpp"

int main(int argc, char** argv) { return einhyp::cli::main(argc, argv); }
