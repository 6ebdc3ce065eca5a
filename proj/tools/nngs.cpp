#include "nngs/cli.hpp"

int main(int argc, char** argv) { return nngs::cli::run(argc, argv); }
