#include "curvflow/cli.hpp"

int main(int argc, char** argv) { return curvflow::cli::run(argc, argv); }
